"""Command-line runs: output modes, sentence sources and exit statuses."""

import io
import json

import pytest

from conftest import fixture_path
from dcxg import EXIT_LOAD_ERROR, EXIT_OK, EXIT_USAGE, main, parse_args, run


def _run(tmp_path, *argv, grammar="student_read.json", vectors=None, stdin=""):
    vectors = vectors or fixture_path("vectors.txt")
    config = parse_args(["--grammar", str(grammar if "/" in str(grammar) else fixture_path(grammar)),
                         "--vectors", str(vectors), "--config-dir", str(tmp_path / "cfg"), "--quiet", *argv])
    out, err = io.StringIO(), io.StringIO()
    status = run(config, out, err, io.StringIO(stdin))
    return status, out.getvalue(), err.getvalue()


def test_summary(tmp_path) -> None:
    status, out, _ = _run(tmp_path, "students read")
    assert status == EXIT_OK
    assert out.startswith("# students read")
    assert "read-lexeme-cx" in out
    assert "reading-fr: reader=students, text=expected:book-fr" in out
    assert "residue: -" in out


def test_trace(tmp_path) -> None:
    status, out, _ = _run(tmp_path, "--trace", "students read")
    assert status == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "# students read"
    assert lines[1].startswith("0000 SCAN ")


def test_structured(tmp_path) -> None:
    status, out, _ = _run(tmp_path, "--structured", "students read", "zebra")
    assert status == EXIT_OK
    document = json.loads(out)
    assert [s["tokens"] for s in document["sentences"]] == [["students", "read"], ["zebra"]]
    assert document["sentences"][1]["residue"] == ["zebra"]


def test_sentence_file_and_stdin(tmp_path) -> None:
    sentences = tmp_path / "sentences.txt"
    sentences.write_text("students read\n\n, .\n", encoding="utf-8")
    status, out, _ = _run(tmp_path, "--file", str(sentences))
    assert status == EXIT_OK
    assert out.count("# ") == 2
    assert "(no words)" in out

    status, out, _ = _run(tmp_path, "--file", "-", stdin="john laughed\n")
    assert status == EXIT_OK
    assert "# john laughed" in out


def test_threshold_flag(tmp_path) -> None:
    sentence = "mary gives john a book"
    _, default, _ = _run(tmp_path, "--structured", sentence, grammar="ditransitive.json")
    _, raised, _ = _run(tmp_path, "--structured", "--threshold", "9", sentence, grammar="ditransitive.json")
    assert [r["construction"] for r in json.loads(default)["sentences"][0]["recognitions"]] == ["ditransitive-cx"]
    assert json.loads(raised)["sentences"][0]["recognitions"] == []


def test_jobs_do_not_change_output(tmp_path) -> None:
    sentences = fixture_path("corpus.txt")
    _, serial, _ = _run(tmp_path, "--trace", "--file", sentences, grammar="ditransitive.json")
    _, threaded, _ = _run(tmp_path, "--trace", "--jobs", "4", "--file", sentences, grammar="ditransitive.json")
    assert serial == threaded


def test_save_params(tmp_path) -> None:
    status, _, _ = _run(tmp_path, "--save-params", "--mas", "3", "students read")
    assert status == EXIT_OK
    saved = json.loads((tmp_path / "cfg" / "config.json").read_text(encoding="utf-8"))
    assert saved["mas"] == 3.0


def test_missing_grammar_names_the_path(tmp_path) -> None:
    missing = tmp_path / "absent.json"
    status, _, err = _run(tmp_path, "x", grammar=missing)
    assert status == EXIT_LOAD_ERROR
    assert str(missing) in err


def test_malformed_vectors(tmp_path) -> None:
    bad = tmp_path / "bad.txt"
    bad.write_text("1 2\nbook 1\n", encoding="utf-8")
    status, _, err = _run(tmp_path, "x", vectors=bad)
    assert status == EXIT_LOAD_ERROR
    assert str(bad) in err


def test_invalid_grammar(tmp_path) -> None:
    grammar = tmp_path / "g.json"
    grammar.write_text(json.dumps({"constructions": {"a-cx": {"supertypes": ["nowhere-cx"]}}}), encoding="utf-8")
    status, _, err = _run(tmp_path, "x", grammar=grammar)
    assert status == EXIT_LOAD_ERROR
    assert "unknown supertype nowhere-cx" in err


def test_bad_parameter_value(tmp_path) -> None:
    status, _, err = _run(tmp_path, "--sim-threshold", "3", "x")
    assert status == EXIT_LOAD_ERROR
    assert "sim_threshold" in err


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["--grammar", "g.json", "--vectors", "v.txt"],
        ["--grammar", "g.json", "--vectors", "v.txt", "--jobs", "0", "x"],
        ["--grammar", "g.json", "--vectors", "v.txt", "--trace", "--structured", "x"],
    ],
)
def test_usage_errors(argv) -> None:
    assert main(argv) == EXIT_USAGE


def test_malformed_prototype_names_the_grammar(tmp_path) -> None:
    grammar = tmp_path / "g.json"
    grammar.write_text(json.dumps({"frames": {"book-fr": {"prototypes": {"text": [["book", "heavy"]]}}}}),
                       encoding="utf-8")
    status, _, err = _run(tmp_path, "x", grammar=grammar)
    assert status == EXIT_LOAD_ERROR
    assert str(grammar) in err
    assert "malformed filler" in err


def test_sentence_file_must_be_utf8(tmp_path) -> None:
    sentences = tmp_path / "s.txt"
    sentences.write_bytes(b"students read\n\xff\xfe\n")
    status, out, err = _run(tmp_path, "--file", str(sentences))
    assert status == EXIT_LOAD_ERROR
    assert out == ""
    assert f"{sentences}: not UTF-8 text" in err


def test_unreadable_sentence_file(tmp_path) -> None:
    status, _, err = _run(tmp_path, "--file", str(tmp_path))
    assert status == EXIT_LOAD_ERROR
    assert str(tmp_path) in err
