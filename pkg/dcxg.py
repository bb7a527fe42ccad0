#!/usr/bin/env python3
"""
dcxg - construction interpretation on the command line

Loads a grammar and a vector file, interprets sentences given inline, in a
file (one per line) or on stdin, and prints a summary table, the trace, or
one structured JSON document.

    dcxg --grammar fixtures/student_read.json --vectors fixtures/vectors.txt "students read"
"""

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from prettytable import PrettyTable
from tqdm import tqdm

from errors import ConfigError, EmptyInput, FormatError, ParseError, ValidationError
from feature_structure import to_text
from grammar_model import load_grammar
from params_manager import ParamsManager
from processor import interpret, tokenize
from vector_space import load_vectors

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_LOAD_ERROR = 1
EXIT_USAGE = 2

SUMMARY, TRACE, STRUCTURED = "summary", "trace", "structured"


@dataclass
class RunConfig:
    grammar: Path
    vectors: Path
    params_file: Path = None
    sentences: list = field(default_factory=list)
    sentence_file: str = None
    mode: str = SUMMARY
    overrides: dict = field(default_factory=dict)
    jobs: int = 1
    save_params: bool = False
    quiet: bool = False
    verbose: bool = False
    seed: int = None
    config_dir: Path = None


def build_parser():
    parser = argparse.ArgumentParser(prog="dcxg", description="Distributional construction grammar interpreter")
    parser.add_argument("sentences", nargs="*", help="sentences to interpret")
    parser.add_argument("--grammar", type=Path, required=True, help="grammar file (JSON)")
    parser.add_argument("--vectors", type=Path, required=True, help="vector file ('<count> <dim>' header)")
    parser.add_argument("--params", type=Path, default=None, help="activation parameters file (JSON)")
    parser.add_argument("--file", default=None, help="read one sentence per line from FILE ('-' for stdin)")
    output = parser.add_mutually_exclusive_group()
    output.add_argument("--trace", action="store_true", help="print the processing trace")
    output.add_argument("--structured", action="store_true", help="print one JSON document")
    for name, info in ParamsManager.PARAM_INFO.items():
        if info["flag"]:
            parser.add_argument(info["flag"], dest=name, type=float, default=None, help=info["help"])
    parser.add_argument("--seed", type=int, default=None, help="reserved; processing is deterministic")
    parser.add_argument("--jobs", type=int, default=1, help="sentences processed in parallel (default 1)")
    parser.add_argument("--save-params", action="store_true", help="store the resolved parameters as user config")
    parser.add_argument("--config-dir", type=Path, default=None, help="user config folder (default ~/.dcxg)")
    parser.add_argument("--quiet", action="store_true", help="no progress bar")
    parser.add_argument("--verbose", action="store_true", help="debug logging on stderr")
    return parser


def parse_args(argv=None):
    """RunConfig from the command line; usage errors exit with status 2."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.sentences and args.file is None:
        parser.error("give sentences or --file")
    if args.jobs < 1:
        parser.error("--jobs must be at least 1")
    mode = TRACE if args.trace else STRUCTURED if args.structured else SUMMARY
    overrides = {name: getattr(args, name) for name, info in ParamsManager.PARAM_INFO.items() if info["flag"]}
    return RunConfig(
        grammar=args.grammar,
        vectors=args.vectors,
        params_file=args.params,
        sentences=list(args.sentences),
        sentence_file=args.file,
        mode=mode,
        overrides=overrides,
        jobs=args.jobs,
        save_params=args.save_params,
        quiet=args.quiet,
        verbose=args.verbose,
        seed=args.seed,
        config_dir=args.config_dir,
    )


def _read_sentences(config, stdin):
    sentences = list(config.sentences)
    if config.sentence_file == "-":
        sentences.extend(stdin.read().splitlines())
    elif config.sentence_file is not None:
        with open(config.sentence_file, "r", encoding="utf-8") as f:
            sentences.extend(f.read().splitlines())
    return [line.strip() for line in sentences if line.strip()]


def _interpret_one(sentence, grammar, vectors, params):
    try:
        return interpret(tokenize(sentence), grammar, vectors, params)
    except EmptyInput:
        return None


def process_sentences(sentences, grammar, vectors, params, jobs=1, progress_callback=None):
    """Interpretations in input order; None for sentences without a single word."""
    results = []
    total = len(sentences)
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        for done, result in enumerate(pool.map(lambda s: _interpret_one(s, grammar, vectors, params),
                                               sentences), start=1):
            results.append(result)
            if progress_callback:
                progress_callback(int(done * 100 / total), f"{done}/{total} sentences")
    return results


def _number(value):
    return "-" if value is None else f"{value:.3f}"


def render_summary(sentence, result, grammar):
    lines = [f"# {sentence}"]
    if result is None:
        lines.append("(no words)")
        return "\n".join(lines)
    table = PrettyTable()
    table.field_names = ["object", "kind", "A", "theta", "sigma", "route"]
    table.align = "l"
    for name in result.activated:
        labels = [label for label in result.route_labels if label.rsplit("@", 1)[0] == name]
        thetas = [result.scores[label]["theta"] for label in labels
                  if label in result.scores and result.scores[label]["theta"] is not None]
        routes = ",".join(dict.fromkeys(result.route_labels[label] for label in labels)) or "-"
        record = result.records[name]
        table.add_row([name, grammar.category_of(name), _number(record["A"]),
                       _number(thetas[0] if thetas else None), _number(record["sigma"]), routes])
    lines.append(table.get_string())
    lines.append(f"meaning: {to_text(result.meaning)}")
    for frame, roles in result.bindings.items():
        bound = ", ".join(f"{role}={value}" for role, value in roles.items())
        lines.append(f"  {frame}: {bound}")
    lines.append(f"residue: {' '.join(result.residue) if result.residue else '-'}")
    return "\n".join(lines)


def render(config, sentences, results, grammar):
    if config.mode == STRUCTURED:
        document = {"sentences": [
            result.to_dict() if result is not None else {"sentence": sentence, "tokens": []}
            for sentence, result in zip(sentences, results)
        ]}
        return json.dumps(document, indent=2, ensure_ascii=False)
    blocks = []
    for sentence, result in zip(sentences, results):
        if config.mode == TRACE:
            lines = [f"# {sentence}"] + (result.trace_lines() if result is not None else [])
            blocks.append("\n".join(lines))
        else:
            blocks.append(render_summary(sentence, result, grammar))
    return "\n\n".join(blocks)


def run(config, stdout=None, stderr=None, stdin=None):
    """Load everything, interpret, print; returns the exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    stdin = stdin or sys.stdin

    try:
        manager = ParamsManager(config.config_dir)
        if config.params_file is not None:
            manager.load_params_file(config.params_file)
        params = manager.resolve(config.overrides)
        if config.save_params:
            manager.save_config()
    except ConfigError as e:
        print(f"dcxg: parameters: {e}", file=stderr)
        return EXIT_LOAD_ERROR
    if config.seed is not None:
        logger.debug("Ignoring --seed %s, processing is deterministic", config.seed)

    try:
        vectors = load_vectors(config.vectors)
    except OSError as e:
        print(f"dcxg: {config.vectors}: {e.strerror or e}", file=stderr)
        return EXIT_LOAD_ERROR
    except FormatError as e:
        print(f"dcxg: {config.vectors}:{e}", file=stderr)
        return EXIT_LOAD_ERROR

    try:
        grammar = load_grammar(config.grammar, vectors)
    except OSError as e:
        print(f"dcxg: {config.grammar}: {e.strerror or e}", file=stderr)
        return EXIT_LOAD_ERROR
    except (ParseError, ValidationError) as e:
        print(f"dcxg: {config.grammar}: {e}", file=stderr)
        return EXIT_LOAD_ERROR

    try:
        sentences = _read_sentences(config, stdin)
    except OSError as e:
        print(f"dcxg: {config.sentence_file}: {e.strerror or e}", file=stderr)
        return EXIT_LOAD_ERROR
    except UnicodeDecodeError:
        print(f"dcxg: {config.sentence_file}: not UTF-8 text", file=stderr)
        return EXIT_LOAD_ERROR

    show_bar = not config.quiet and hasattr(stderr, "isatty") and stderr.isatty()
    with tqdm(total=100, file=stderr, disable=not show_bar, unit="%") as bar:
        def progress_callback(percent, message):
            bar.update(percent - bar.n)
            bar.set_postfix_str(message)

        results = process_sentences(sentences, grammar, vectors, params, config.jobs, progress_callback)

    print(render(config, sentences, results, grammar), file=stdout)
    return EXIT_OK


def main(argv=None):
    try:
        config = parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if config.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
