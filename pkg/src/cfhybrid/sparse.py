"""Classic vector-space retrieval: inverted index, TF/IDF weights, cosine scoring.

Weighting scheme (sealed into the index format, not a runtime option):
log-tf ``1 + ln(tf)`` times idf ``ln(N/df)`` on both documents and queries,
with cosine length normalization.  Only documents sharing at least one
positively-weighted query term are scored; everything else has an implicit
sparse score of 0, a convention the fusion stage relies on.
"""
from __future__ import annotations

import math
import struct
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .corpus import Document
from .ranking import ScoredList, rank_entries
from .textnorm import PipelineConfig, document_text, tokenize

__all__ = [
    "Posting",
    "SparseIndex",
    "build_index",
    "tfidf_weight",
    "score_query",
    "save_index",
    "load_index",
]

INDEX_MAGIC = b"SPIX"
INDEX_VERSION = 1


@dataclass(frozen=True)
class Posting:
    doc_ordinal: int
    term_frequency: int


@dataclass
class SparseIndex:
    """Immutable-after-build inverted index with precomputed document norms.

    ``doc_norms[d]`` is the Euclidean norm of document d's full TF/IDF vector,
    so query scoring only needs the postings of the query's own terms.
    """

    vocabulary: dict[str, tuple[Posting, ...]]
    doc_table: tuple[str, ...]
    doc_norms: tuple[float, ...]

    @property
    def doc_count(self) -> int:
        return len(self.doc_table)

    def doc_freq(self, term: str) -> int:
        return len(self.vocabulary.get(term, ()))

    def doc_ids(self) -> frozenset[str]:
        return frozenset(self.doc_table)


def tfidf_weight(tf: int, df: int, n_docs: int) -> float:
    """Log-tf x idf weight ``(1 + ln tf) * ln(N / df)``.

    Zero when df == N: a term present in every document carries no signal.
    """
    if tf < 1 or df < 1 or df > n_docs:
        raise ValueError(f"require tf >= 1 and 1 <= df <= N, got tf={tf} df={df} N={n_docs}")
    return (1.0 + math.log(tf)) * math.log(n_docs / df)


def build_index(docs: Sequence[Document], cfg: PipelineConfig) -> SparseIndex:
    """Tokenize every document and build postings plus TF/IDF norms."""
    if not docs:
        raise ValueError("cannot build an index over an empty corpus")
    seen: set[str] = set()
    for d in docs:
        if d.doc_id in seen:
            raise ValueError(f"duplicate doc_id {d.doc_id!r}")
        seen.add(d.doc_id)

    term_counts: list[Counter[str]] = [Counter(tokenize(document_text(d), cfg)) for d in docs]
    vocabulary: dict[str, list[Posting]] = {}
    for ordinal, counts in enumerate(term_counts):
        for term, tf in counts.items():
            vocabulary.setdefault(term, []).append(Posting(ordinal, tf))

    n = len(docs)
    df = {term: len(postings) for term, postings in vocabulary.items()}
    norms = []
    for counts in term_counts:
        sq = 0.0
        for term, tf in counts.items():
            w = tfidf_weight(tf, df[term], n)
            sq += w * w
        norms.append(math.sqrt(sq))

    return SparseIndex(
        vocabulary={t: tuple(p) for t, p in vocabulary.items()},
        doc_table=tuple(d.doc_id for d in docs),
        doc_norms=tuple(norms),
    )


def score_query(
    index: SparseIndex,
    query_text: str,
    cfg: PipelineConfig,
    k: int | None = None,
    query_id: str = "",
) -> ScoredList:
    """Cosine similarity between the TF/IDF query vector and each candidate document.

    The index must have been built with the same pipeline config.  Query terms
    outside the vocabulary span no dimension and are dropped; a query with no
    in-vocabulary tokens yields an empty list.  Scores lie in [0, 1].
    """
    n = index.doc_count
    query_weights: dict[str, float] = {}
    for term, tf in Counter(tokenize(query_text, cfg)).items():
        df = index.doc_freq(term)
        if df == 0:
            continue
        w = tfidf_weight(tf, df, n)
        if w > 0.0:
            query_weights[term] = w
    query_norm = math.sqrt(sum(w * w for w in query_weights.values()))
    if query_norm == 0.0:
        return ScoredList(query_id=query_id, entries=())

    dots: dict[int, float] = {}
    for term, wq in query_weights.items():
        df = index.doc_freq(term)
        idf = math.log(n / df)
        for posting in index.vocabulary[term]:
            wd = (1.0 + math.log(posting.term_frequency)) * idf
            dots[posting.doc_ordinal] = dots.get(posting.doc_ordinal, 0.0) + wq * wd

    scored = (
        (index.doc_table[ordinal], dot / (query_norm * index.doc_norms[ordinal]))
        for ordinal, dot in dots.items()
    )
    return rank_entries(query_id, scored, k)


# --- optional on-disk persistence -----------------------------------------
#
# Binary, little-endian:
#   magic "SPIX" | version u8 | doc_count u32 | vocab_size u32
#   per document:  doc_id (u16 length + utf-8 bytes) | norm f64
#   per term (sorted): term (u16 length + utf-8 bytes) | df u32
#                      | df x (ordinal delta u32, tf u32)
# Ordinal deltas are gaps from the previous posting (first = absolute).

def save_index(index: SparseIndex, path: str | Path) -> None:
    out = bytearray()
    out += INDEX_MAGIC
    out += struct.pack("<BII", INDEX_VERSION, index.doc_count, len(index.vocabulary))
    for doc_id, norm in zip(index.doc_table, index.doc_norms):
        raw = doc_id.encode("utf-8")
        out += struct.pack("<H", len(raw)) + raw + struct.pack("<d", norm)
    for term in sorted(index.vocabulary):
        raw = term.encode("utf-8")
        out += struct.pack("<H", len(raw)) + raw
        postings = index.vocabulary[term]
        out += struct.pack("<I", len(postings))
        prev = 0
        for i, p in enumerate(postings):
            delta = p.doc_ordinal if i == 0 else p.doc_ordinal - prev
            out += struct.pack("<II", delta, p.term_frequency)
            prev = p.doc_ordinal
    Path(path).write_bytes(bytes(out))


def load_index(path: str | Path) -> SparseIndex:
    data = Path(path).read_bytes()
    view = memoryview(data)
    if view[:4] != INDEX_MAGIC:
        raise ValueError(f"{path}: not a sparse index file (bad magic)")
    version, doc_count, vocab_size = struct.unpack_from("<BII", view, 4)
    if version != INDEX_VERSION:
        raise ValueError(f"{path}: unsupported index version {version}")
    pos = 4 + struct.calcsize("<BII")

    def read_string() -> str:
        nonlocal pos
        (length,) = struct.unpack_from("<H", view, pos)
        pos += 2
        s = bytes(view[pos : pos + length]).decode("utf-8")
        pos += length
        return s

    doc_table = []
    doc_norms = []
    for _ in range(doc_count):
        doc_table.append(read_string())
        (norm,) = struct.unpack_from("<d", view, pos)
        pos += 8
        doc_norms.append(norm)

    vocabulary: dict[str, tuple[Posting, ...]] = {}
    for _ in range(vocab_size):
        term = read_string()
        (df,) = struct.unpack_from("<I", view, pos)
        pos += 4
        postings = []
        ordinal = 0
        for i in range(df):
            delta, tf = struct.unpack_from("<II", view, pos)
            pos += 8
            ordinal = delta if i == 0 else ordinal + delta
            postings.append(Posting(ordinal, tf))
        vocabulary[term] = tuple(postings)

    return SparseIndex(
        vocabulary=vocabulary, doc_table=tuple(doc_table), doc_norms=tuple(doc_norms)
    )
