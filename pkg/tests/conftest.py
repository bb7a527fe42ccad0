"""Shared fixtures: the fixture vectors, grammars and default parameters."""

import io
import json
import os
import sys

import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, ROOT)

from activation import ActivationParams  # noqa: E402
from grammar_model import load_grammar  # noqa: E402
from vector_space import load_vectors  # noqa: E402

FIXTURES = os.path.join(ROOT, "fixtures")


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURES, name)


def grammar_from(data: dict, vectors=None):
    """Load an inline grammar the way a grammar file is loaded."""
    return load_grammar(io.StringIO(json.dumps(data)), vectors)


@pytest.fixture(scope="session")
def vectors():
    return load_vectors(fixture_path("vectors.txt"))


@pytest.fixture
def params() -> ActivationParams:
    return ActivationParams()


@pytest.fixture(scope="session")
def student_grammar(vectors):
    return load_grammar(fixture_path("student_read.json"), vectors)


@pytest.fixture(scope="session")
def idiom_grammar(vectors):
    return load_grammar(fixture_path("idiom.json"), vectors)


@pytest.fixture(scope="session")
def ditransitive_grammar(vectors):
    return load_grammar(fixture_path("ditransitive.json"), vectors)


@pytest.fixture(scope="session")
def commerce_grammar(vectors):
    return load_grammar(fixture_path("commerce.json"), vectors)


@pytest.fixture(scope="session")
def corpus() -> list:
    with open(fixture_path("corpus.txt"), encoding="utf-8") as f:
        return [line.strip() for line in f if line.strip()]


@pytest.fixture(scope="session")
def a_man_grammar(vectors):
    return load_grammar(fixture_path("a_man.json"), vectors)
