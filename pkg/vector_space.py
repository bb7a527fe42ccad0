#!/usr/bin/env python3
"""
Distributional vectors: plain-text embedding loader, cosine similarity,
thematic-fit prototypes.

File format: first line `<count> <dim>`, then one `<word> <f1> ... <f_dim>`
row per word, UTF-8, single spaces.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from errors import (
    DimensionMismatch,
    DomainError,
    EmptyFillerList,
    FormatError,
    OutOfVocabulary,
    ZeroVector,
)
from feature_structure import ABSENT

logger = logging.getLogger(__name__)


def normalize(vector):
    vector = np.asarray(vector, dtype=np.float64)
    norm = np.linalg.norm(vector)
    if norm == 0.0 or not math.isfinite(norm):
        raise ZeroVector("cannot normalize an all-zero vector")
    return vector / norm


def cosine(u, v):
    """Cosine of the angle between `u` and `v`, clamped to [-1, 1]."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DimensionMismatch(None, f"cannot compare vectors of dim {u.shape} and {v.shape}")
    norm_u = np.linalg.norm(u)
    norm_v = np.linalg.norm(v)
    if norm_u == 0.0 or norm_v == 0.0:
        raise ZeroVector("cosine is undefined for an all-zero vector")
    score = float(np.dot(u, v) / (norm_u * norm_v))
    return min(1.0, max(-1.0, score))


class VectorStore:
    """Immutable map from case-folded word to its L2-normalized vector."""

    def __init__(self, words, matrix):
        matrix = np.array(matrix, dtype=np.float64)
        matrix.flags.writeable = False
        self._matrix = matrix
        self._words = tuple(words)
        self._index = {word: row for row, word in enumerate(self._words)}

    @property
    def dim(self):
        return self._matrix.shape[1] if self._matrix.ndim == 2 else 0

    @property
    def words(self):
        return self._words

    def __len__(self):
        return len(self._words)

    def __contains__(self, word):
        return str(word).lower() in self._index

    def get(self, word):
        """Normalized vector for `word`, or ABSENT when out of vocabulary."""
        row = self._index.get(str(word).lower())
        if row is None:
            return ABSENT
        return self._matrix[row]

    def vector(self, word):
        found = self.get(word)
        if found is ABSENT:
            raise OutOfVocabulary(str(word).lower())
        return found

    def similarity(self, first, second):
        """Cosine between two words, None if either is out of vocabulary."""
        u, v = self.get(first), self.get(second)
        if u is ABSENT or v is ABSENT:
            return None
        return cosine(u, v)


def _open_lines(source):
    if isinstance(source, (str, Path)):
        with open(source, "rb") as handle:
            data = handle.read()
    else:
        data = source.read()
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise FormatError(None, f"not UTF-8 text ({e})")
    return data.split("\n")


def load_vectors(source):
    """Parse a vector file from a path or a byte/text stream into a VectorStore."""
    lines = _open_lines(source)
    if not lines or not lines[0].strip():
        raise FormatError(1, "missing '<count> <dim>' header")
    header = lines[0].split()
    try:
        count, dim = (int(part) for part in header)
    except ValueError:
        raise FormatError(1, f"malformed header {lines[0]!r}, expected '<count> <dim>'")
    if count < 0 or dim <= 0:
        raise FormatError(1, f"header declares count={count}, dim={dim}")

    words, rows = [], []
    seen = {}
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.rstrip("\r")
        if not line.strip():
            continue
        parts = line.split()
        word, values = parts[0], parts[1:]
        if len(values) != dim:
            raise DimensionMismatch(lineno, f"{word!r} has {len(values)} values, expected {dim}")
        try:
            row = [float(value) for value in values]
        except ValueError:
            raise FormatError(lineno, f"non-numeric value in row for {word!r}")
        key = word.lower()
        if key in seen:
            raise FormatError(lineno, f"duplicate word {word!r} (first seen on line {seen[key]})")
        try:
            row = normalize(row)
        except ZeroVector:
            raise FormatError(lineno, f"all-zero vector for {word!r}")
        seen[key] = lineno
        words.append(key)
        rows.append(row)

    if len(words) != count:
        raise FormatError(1, f"header declares {count} vectors, file holds {len(words)}")
    logger.info("Loaded %d vectors of dim %d", len(words), dim)
    matrix = np.vstack(rows) if rows else np.zeros((0, dim))
    return VectorStore(words, matrix)


@dataclass(frozen=True, eq=False)
class Prototype:
    vector: np.ndarray
    source_fillers: tuple = field(default_factory=tuple)

    @property
    def unit(self):
        return normalize(self.vector)


def build_prototype(fillers, vectors):
    """Weighted centroid of the fillers' normalized vectors: sum(w * v) / sum(w)."""
    fillers = [(str(word).lower(), float(weight)) for word, weight in fillers]
    if not fillers:
        raise EmptyFillerList("a prototype needs at least one filler")
    total = 0.0
    centroid = np.zeros(vectors.dim, dtype=np.float64)
    for word, weight in fillers:
        if weight <= 0:
            raise DomainError(f"salience weight for {word!r} must be positive, got {weight}")
        centroid = centroid + weight * vectors.vector(word)
        total += weight
    return Prototype(centroid / total, tuple(fillers))


def thematic_fit(word, prototype, vectors):
    """Typicality of `word` for the role the prototype stands for."""
    return cosine(vectors.vector(word), prototype.vector)
