from pathlib import Path

import pytest

from pattern_kb.patternfile import BUNDLED_KB_DIR, load_kb, parse_kb_text, parse_new
from pattern_kb.search import SearchParams, build_alignments

KB_DIR = BUNDLED_KB_DIR

FIGURE1_QUERY = "Jack stethoscope black-bag fair-hair blue-eyes Dorking"
FIGURE1_ROWS = {"jack1", "person", "doctor", "fair", "hair", "blue", "head", "male", "jackmale"}


def store_from(text: str):
    return parse_kb_text(text)


def align(store, text: str, **params):
    new = parse_new(text, store)
    return build_alignments(store, store.costs, new, SearchParams(**params))


def row_labels(alignment) -> set[str]:
    return {row.pattern.label for row in alignment.rows[1:]}


@pytest.fixture
def kb_dir() -> Path:
    return KB_DIR


@pytest.fixture(scope="session")
def figure1():
    return load_kb(KB_DIR / "figure1.sp")


@pytest.fixture(scope="session")
def figure1_ranked(figure1):
    return align(figure1, FIGURE1_QUERY)


@pytest.fixture(scope="session")
def tweety():
    return load_kb(KB_DIR / "tweety.sp")


@pytest.fixture(scope="session")
def car():
    return load_kb(KB_DIR / "car.sp")


@pytest.fixture(scope="session")
def toy():
    return load_kb(KB_DIR / "toy.sp")
