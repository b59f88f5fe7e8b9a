import io
from pathlib import Path

import numpy as np
import pytest

from mvnet.corpus import parse_gold_csv_file
from mvnet.embeddings import EmbeddingTable, load_word2vec_file
from mvnet.features import examples_from_gold

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
GOLD_CSV = FIXTURES / "gold_300.csv"
EMBEDDINGS_BIN = FIXTURES / "embeddings_50x300.bin"
TRANSCRIPTS = FIXTURES / "transcripts"


# one line per acceptance criterion, printed after the run so pytest's
# output capture cannot swallow it
ACCEPTANCE_RESULTS = {}


def record_criterion(number, label, ok, detail=""):
    """ok: True = PASS, False = FAIL, None = SKIP."""
    status = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
    ACCEPTANCE_RESULTS[str(number)] = (label, status, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        label, status, detail = ACCEPTANCE_RESULTS[number]
        suffix = f" — {detail}" if detail else ""
        terminalreporter.write_line(f"criterion {number} [{status}] {label}{suffix}")


def pytest_addoption(parser):
    # real-corpus reproduction inputs (env vars MVNET_GOLD_CSV /
    # MVNET_EMBEDDINGS work as a fallback)
    parser.addoption("--real-gold", default=None,
                     help="path to the full gold-standard CSV")
    parser.addoption("--real-embeddings", default=None,
                     help="path to the pretrained word2vec binary")
    parser.addoption("--real-max-words", type=int, default=None,
                     help="cap the pretrained vocabulary while loading")


@pytest.fixture(scope="session")
def fixture_table():
    return load_word2vec_file(EMBEDDINGS_BIN)


@pytest.fixture(scope="session")
def gold_records():
    return parse_gold_csv_file(GOLD_CSV)


@pytest.fixture(scope="session")
def fixture_examples(gold_records, fixture_table):
    return examples_from_gold(gold_records, fixture_table)


def small_table(tokens="abc", dim=3, seed=0):
    """Tiny embedding table with deterministic vectors for unit tests."""
    if isinstance(tokens, str):
        tokens = list(tokens)
    rng = np.random.default_rng(seed)
    matrix = rng.standard_normal((len(tokens), dim)).astype(np.float32)
    return EmbeddingTable(dim, {t: i for i, t in enumerate(tokens)}, matrix)


def as_stream(data: bytes) -> io.BytesIO:
    return io.BytesIO(data)
