"""Precomputed dense embeddings: loading, validation, similarity scoring.

Embeddings are consumed here, never computed; producing them is the job of a
separate one-shot exporter.  The portable ``emb-v1`` file is the only contract
between the two: line-delimited UTF-8, a JSON header
``{"format": "emb-v1", "dim": D, "kind": "document"|"query", "model": "..."}``
followed by one ``{"id": ..., "vector": [...]}`` object per line.

Vectors are stored as 32-bit floats (matching upstream model precision) and
all dot products accumulate in 64-bit.  Scoring is exact and exhaustive: at
this corpus scale approximate search would buy nothing and would cost
determinism.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Iterable, Literal, Sequence

import numpy as np

from .ranking import ScoredList, rank_entries

__all__ = [
    "EMB_FORMAT",
    "EmbeddingStore",
    "load_embeddings",
    "write_embeddings",
    "cosine_similarity",
    "euclidean_score",
    "score_query_dense",
]

EMB_FORMAT = "emb-v1"

Kind = Literal["document", "query"]
Metric = Literal["cosine", "euclidean"]


@dataclass
class EmbeddingStore:
    """Id-keyed fixed-dimension vectors; immutable after load."""

    dim: int
    kind: Kind
    model: str
    ids: tuple[str, ...]
    matrix: np.ndarray  # float32, shape (len(ids), dim)

    def __post_init__(self) -> None:
        self._row = {doc_id: i for i, doc_id in enumerate(self.ids)}

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, vec_id: str) -> bool:
        return vec_id in self._row

    def vector(self, vec_id: str) -> np.ndarray:
        return self.matrix[self._row[vec_id]]

    def id_set(self) -> frozenset[str]:
        return frozenset(self.ids)


def _as_bytes(raw: BinaryIO | bytes) -> bytes:
    return raw if isinstance(raw, bytes) else raw.read()


def load_embeddings(raw: BinaryIO | bytes, expected_kind: Kind) -> EmbeddingStore:
    """Parse and validate an emb-v1 stream.

    Errors name the offending id: a row whose length disagrees with the
    header dim, a non-finite component, a duplicate id, or a zero vector
    (cosine needs norm > 0) all reject the stream.
    """
    lines = _as_bytes(raw).splitlines()
    if not lines:
        raise ValueError("empty embedding stream")
    header = json.loads(lines[0].decode("utf-8"))
    if header.get("format") != EMB_FORMAT:
        raise ValueError(f"expected format {EMB_FORMAT!r}, got {header.get('format')!r}")
    dim = int(header["dim"])
    if dim < 1:
        raise ValueError(f"header dim must be >= 1, got {dim}")
    kind = header.get("kind")
    if kind != expected_kind:
        raise ValueError(f"expected kind {expected_kind!r}, got {kind!r}")

    ids: list[str] = []
    rows: list[np.ndarray] = []
    seen: set[str] = set()
    for line in lines[1:]:
        if not line.strip():
            continue
        rec = json.loads(line.decode("utf-8"))
        vec_id = str(rec["id"])
        if vec_id in seen:
            raise ValueError(f"duplicate embedding id {vec_id!r}")
        seen.add(vec_id)
        vec = np.asarray(rec["vector"], dtype=np.float32)
        if vec.shape != (dim,):
            raise ValueError(f"embedding {vec_id!r} has length {vec.shape}, header says dim={dim}")
        if not np.all(np.isfinite(vec)):
            raise ValueError(f"embedding {vec_id!r} has non-finite components")
        if not np.any(vec):
            raise ValueError(f"embedding {vec_id!r} is the zero vector")
        ids.append(vec_id)
        rows.append(vec)

    matrix = np.stack(rows) if rows else np.zeros((0, dim), dtype=np.float32)
    return EmbeddingStore(
        dim=dim, kind=expected_kind, model=str(header.get("model", "")), ids=tuple(ids), matrix=matrix
    )


def write_embeddings(
    ids: Sequence[str],
    vectors: Iterable[Sequence[float]],
    kind: Kind,
    model: str,
) -> bytes:
    """Serialize vectors to emb-v1 (values pass through float32 first)."""
    vecs = [np.asarray(v, dtype=np.float32) for v in vectors]
    if len(vecs) != len(ids):
        raise ValueError(f"{len(ids)} ids but {len(vecs)} vectors")
    if not vecs:
        raise ValueError("refusing to write an empty embedding file")
    dim = vecs[0].shape[0]
    out = [json.dumps({"format": EMB_FORMAT, "dim": int(dim), "kind": kind, "model": model})]
    for vec_id, vec in zip(ids, vecs):
        if vec.shape != (dim,):
            raise ValueError(f"embedding {vec_id!r} has inconsistent dimension")
        out.append(json.dumps({"id": vec_id, "vector": [float(x) for x in vec]}))
    return ("\n".join(out) + "\n").encode("utf-8")


def load_embeddings_file(path: str | Path, expected_kind: Kind) -> EmbeddingStore:
    return load_embeddings(Path(path).read_bytes(), expected_kind)


def cosine_similarity(a: Sequence[float], b: Sequence[float]) -> float:
    """``a . b / (|a| |b|)`` in 64-bit; raises on zero-norm input."""
    av = np.asarray(a, dtype=np.float64)
    bv = np.asarray(b, dtype=np.float64)
    if av.shape != bv.shape:
        raise ValueError(f"shape mismatch: {av.shape} vs {bv.shape}")
    na = math.sqrt(float(np.dot(av, av)))
    nb = math.sqrt(float(np.dot(bv, bv)))
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine similarity undefined for zero-norm vectors")
    return float(np.dot(av, bv)) / (na * nb)


def euclidean_score(a: Sequence[float], b: Sequence[float]) -> float:
    """Negated Euclidean distance, so larger means more similar."""
    av = np.asarray(a, dtype=np.float64)
    bv = np.asarray(b, dtype=np.float64)
    if av.shape != bv.shape:
        raise ValueError(f"shape mismatch: {av.shape} vs {bv.shape}")
    return -float(np.linalg.norm(av - bv))


def score_query_dense(
    docs: EmbeddingStore,
    query_vec: Sequence[float],
    metric: Metric = "cosine",
    k: int | None = None,
    query_id: str = "",
) -> ScoredList:
    """Score every document in the store against one query vector.

    Dense retrieval has no candidate pruning: the result covers the whole
    store (truncated to k after sorting with the global tie-break).
    """
    q = np.asarray(query_vec, dtype=np.float64)
    if q.shape != (docs.dim,):
        raise ValueError(f"query vector has shape {q.shape}, store dim is {docs.dim}")
    m = docs.matrix.astype(np.float64)
    if metric == "cosine":
        qnorm = math.sqrt(float(np.dot(q, q)))
        if qnorm == 0.0:
            raise ValueError("cosine similarity undefined for zero-norm query")
        row_norms = np.sqrt(np.einsum("ij,ij->i", m, m))
        sims = (m @ q) / (row_norms * qnorm)
    elif metric == "euclidean":
        sims = -np.linalg.norm(m - q, axis=1)
    else:
        raise ValueError(f"unknown metric {metric!r}")
    return rank_entries(query_id, zip(docs.ids, (float(s) for s in sims)), k)
