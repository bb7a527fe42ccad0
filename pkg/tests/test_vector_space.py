"""Vector file loading, cosine, prototypes and thematic fit."""

import io
import math

import numpy as np
import pytest

from conftest import fixture_path
from errors import (
    DimensionMismatch,
    DomainError,
    EmptyFillerList,
    FormatError,
    OutOfVocabulary,
    ZeroVector,
)
from feature_structure import ABSENT
from vector_space import build_prototype, cosine, load_vectors, normalize, thematic_fit


def _store(text: str):
    return load_vectors(io.StringIO(text))


def test_cosine_values() -> None:
    assert cosine([1, 2, 3], [4, 5, 6]) == pytest.approx(0.974631846, abs=1e-9)
    assert cosine([1, 0], [0, 1]) == pytest.approx(0.0)
    assert cosine([1, 0], [-2, 0]) == pytest.approx(-1.0)
    assert -1.0 <= cosine([1e-300, 1], [1e-300, 1]) <= 1.0


def test_cosine_rejects_bad_input() -> None:
    with pytest.raises(ZeroVector):
        cosine([0, 0], [1, 0])
    with pytest.raises(DimensionMismatch):
        cosine([1, 0], [1, 0, 0])


def test_cosine_is_symmetric_and_scale_invariant() -> None:
    rng = np.random.default_rng(7)
    for _ in range(200):
        u, v = rng.normal(size=5), rng.normal(size=5)
        scale = rng.uniform(0.01, 100.0)
        assert cosine(u, v) == pytest.approx(cosine(v, u), abs=1e-12)
        assert cosine(scale * u, v) == pytest.approx(cosine(u, v), abs=1e-12)
        assert cosine(u, -v) == pytest.approx(-cosine(u, v), abs=1e-12)


def test_normalize() -> None:
    assert np.linalg.norm(normalize([3, 4])) == pytest.approx(1.0)
    with pytest.raises(ZeroVector):
        normalize([0, 0, 0])


def test_fixture_file_loads(vectors) -> None:
    assert len(vectors) == 25
    assert vectors.dim == 5
    assert "Book" in vectors
    assert np.linalg.norm(vectors.get("magazine")) == pytest.approx(1.0)
    assert vectors.get("zebra") is ABSENT
    assert vectors.similarity("zebra", "book") is None


def test_fixture_similarities(vectors) -> None:
    assert vectors.similarity("book", "gift") == pytest.approx(0.70710678, abs=1e-8)
    assert vectors.similarity("magazine", "book") == pytest.approx(0.8)
    assert vectors.similarity("children", "recipient") == pytest.approx(2 / math.sqrt(5))
    assert vectors.similarity("students", "reader") == pytest.approx(2 / math.sqrt(5))


def test_out_of_vocabulary_vector() -> None:
    store = _store("1 2\nbook 1 0\n")
    with pytest.raises(OutOfVocabulary) as info:
        store.vector("Zebra")
    assert info.value.word == "zebra"


def test_binary_stream_and_crlf() -> None:
    store = load_vectors(io.BytesIO(b"2 2\r\nBook 1 0\r\ngift 1 1\r\n"))
    assert store.words == ("book", "gift")


@pytest.mark.parametrize(
    "text, line, message",
    [
        ("", 1, "header"),
        ("two 2\nbook 1 0\n", 1, "header"),
        ("2 2\nbook 1 0\n", 1, "declares 2"),
        ("1 3\nbook 1 0\n", 2, "expected 3"),
        ("2 2\nbook 1 0\nBOOK 0 1\n", 3, "duplicate"),
        ("1 2\nbook 1 x\n", 2, "non-numeric"),
        ("1 2\nbook 0 0\n", 2, "all-zero"),
    ],
)
def test_malformed_vector_files(text: str, line: int, message: str) -> None:
    with pytest.raises(FormatError, match=message) as info:
        _store(text)
    assert info.value.line == line


def test_dimension_mismatch_is_a_format_error() -> None:
    with pytest.raises(DimensionMismatch):
        _store("1 3\nbook 1 0\n")


def test_missing_file_raises_os_error() -> None:
    with pytest.raises(OSError):
        load_vectors(fixture_path("no-such-vectors.txt"))


def test_prototype_is_weighted_centroid(vectors) -> None:
    prototype = build_prototype([("book", 1.0), ("magazine", 1.0)], vectors)
    assert np.allclose(prototype.vector, [0.0, 0.9, 0.0, 0.3, 0.0])
    assert prototype.source_fillers == (("book", 1.0), ("magazine", 1.0))
    assert np.linalg.norm(prototype.unit) == pytest.approx(1.0)
    assert thematic_fit("book", prototype, vectors) == pytest.approx(0.9486833, abs=1e-7)


def test_prototype_weights(vectors) -> None:
    heavy = build_prototype([("book", 3.0), ("magazine", 1.0)], vectors)
    assert np.allclose(heavy.vector, [0.0, 0.95, 0.0, 0.15, 0.0])


def test_prototype_errors(vectors) -> None:
    with pytest.raises(EmptyFillerList):
        build_prototype([], vectors)
    with pytest.raises(DomainError):
        build_prototype([("book", 0.0)], vectors)
    with pytest.raises(OutOfVocabulary):
        build_prototype([("zebra", 1.0)], vectors)


def test_reader_prototype_fit(vectors) -> None:
    prototype = build_prototype([("student", 1.0), ("scholar", 1.0)], vectors)
    assert thematic_fit("students", prototype, vectors) == pytest.approx(0.9238795, abs=1e-7)
