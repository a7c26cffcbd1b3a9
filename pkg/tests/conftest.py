import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import DATA_DIR  # noqa: E402

from pathoie.corpus import build_tree, read_corpus_file  # noqa: E402


@pytest.fixture(scope="session")
def data_dir():
    return DATA_DIR


@pytest.fixture(scope="session")
def fixture_sentences():
    return read_corpus_file(DATA_DIR / "fixture_corpus.tsv")


@pytest.fixture(scope="session")
def fixture_by_id(fixture_sentences):
    return {s.sent_id: s for s in fixture_sentences}


@pytest.fixture(scope="session")
def fixture_trees(fixture_sentences):
    return {s.sent_id: build_tree(s) for s in fixture_sentences}
