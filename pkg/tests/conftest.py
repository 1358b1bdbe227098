"""Shared fixtures: the tiny checked-in corpus, its embeddings, and the
mini CF-format files.  Also prints one PASS/FAIL/SKIP line per acceptance
criterion when test_acceptance.py runs."""
from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # makes `oracles` importable

from cfhybrid.corpus import parse_normalized_corpus
from cfhybrid.dense import load_embeddings_file
from cfhybrid.sparse import build_index
from cfhybrid.textnorm import default_config

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def tiny_corpus_path() -> Path:
    return DATA_DIR / "tiny_corpus.jsonl"


@pytest.fixture(scope="session")
def tiny_docs_emb_path() -> Path:
    return DATA_DIR / "tiny_docs.emb"


@pytest.fixture(scope="session")
def tiny_queries_emb_path() -> Path:
    return DATA_DIR / "tiny_queries.emb"


@pytest.fixture(scope="session")
def mini_cfc_dir() -> Path:
    return DATA_DIR / "mini_cfc"


@pytest.fixture(scope="session")
def tiny_corpus(tiny_corpus_path):
    return parse_normalized_corpus(tiny_corpus_path.read_bytes())


@pytest.fixture(scope="session")
def pipeline():
    return default_config()


@pytest.fixture(scope="session")
def tiny_index(tiny_corpus, pipeline):
    docs, _ = tiny_corpus
    return build_index(docs, pipeline)


@pytest.fixture(scope="session")
def tiny_doc_store(tiny_docs_emb_path):
    return load_embeddings_file(tiny_docs_emb_path, "document")


@pytest.fixture(scope="session")
def tiny_query_store(tiny_queries_emb_path):
    return load_embeddings_file(tiny_queries_emb_path, "query")


def pytest_runtest_logreport(report):
    """One visible line per acceptance criterion, independent of -v."""
    if "test_acceptance" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.skipped):
        name = report.nodeid.split("::")[-1]
        outcome = "SKIP" if report.skipped else report.outcome.upper()
        print(f"\nACCEPTANCE {name}: {outcome}", file=sys.stderr)
