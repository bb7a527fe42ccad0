#!/usr/bin/env python3
"""
dcxg error hierarchy, shared by every module
"""


class DcxgError(Exception):
    """Base class for every error raised by the engine."""


# --- unification -----------------------------------------------------------

class UnificationFailure(DcxgError):
    """Two structures could not be combined."""

    def __init__(self, path, message):
        self.path = tuple(path)
        super().__init__(message)

    @property
    def path_text(self):
        return format_path(self.path)


class Clash(UnificationFailure):
    """Hard incompatibility at `path` between `left` and `right`."""

    def __init__(self, path, left, right, reason="incompatible values"):
        self.left = left
        self.right = right
        self.reason = reason
        super().__init__(path, f"clash at {format_path(path)}: {reason} ({left!r} vs {right!r})")


class SimilarityBelowThreshold(UnificationFailure):
    """Vector values at `path` are not similar enough; `score` is None when a word is out of vocabulary."""

    def __init__(self, path, score, left, right, threshold):
        self.score = score
        self.left = left
        self.right = right
        self.threshold = threshold
        shown = "n/a" if score is None else f"{score:.6f}"
        super().__init__(
            path,
            f"similarity {shown} below {threshold} at {format_path(path)} ({left} vs {right})",
        )


# --- vectors ---------------------------------------------------------------

class FormatError(DcxgError, ValueError):
    def __init__(self, line, reason):
        self.line = line
        self.reason = reason
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{reason}")


class DimensionMismatch(FormatError):
    pass


class ZeroVector(DcxgError, ValueError):
    pass


class OutOfVocabulary(DcxgError, KeyError):
    def __init__(self, word):
        self.word = word
        super().__init__(word)

    def __str__(self):
        return f"out of vocabulary: {self.word!r}"


class EmptyFillerList(DcxgError, ValueError):
    pass


# --- grammar ---------------------------------------------------------------

class ParseError(DcxgError, ValueError):
    def __init__(self, location, reason):
        self.location = location
        self.reason = reason
        super().__init__(f"{location}: {reason}")


class ValidationError(DcxgError, ValueError):
    """All validation issues found in one grammar, as (object name, rule) pairs."""

    def __init__(self, issues):
        self.issues = list(issues)
        lines = [f"{name}: {rule}" for name, rule in self.issues]
        super().__init__("grammar validation failed:\n  " + "\n  ".join(lines))

    def names(self):
        return [name for name, _ in self.issues]


class InheritanceClash(DcxgError):
    def __init__(self, construction, first, second, path):
        self.construction = construction
        self.first = first
        self.second = second
        self.path = tuple(path)
        super().__init__(
            f"{construction}: ancestors {first} and {second} clash at {format_path(path)}"
        )


# --- activation / processing -------------------------------------------------

class DomainError(DcxgError, ValueError):
    pass


class NoScorableRoles(DcxgError, ValueError):
    pass


class EmptyInput(DcxgError, ValueError):
    pass


class ConfigError(DcxgError, ValueError):
    pass


def format_path(path):
    """`('form', 'syn', 'cat')` -> `form.syn.cat`; the root path is `<root>`."""
    if not path:
        return "<root>"
    return ".".join(str(step) for step in path)
