"""Linear fusion of dense and sparse similarities into one ranking.

Each document's fused score is ``w * dense + (1 - w) * sparse`` where ``w``
is the dense weight.  The sparse channel's similarity for a document sharing
no query term is exactly 0 (the true cosine of orthogonal bag-of-words
vectors), so documents missing from the sparse list default to 0 rather than
being dropped.  Scores are combined raw: both channels are cosines, already
commensurate, and normalizing or rank-fusing them would change the method.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .corpus import QueryRecord
from .dense import EmbeddingStore, Metric, score_query_dense
from .ranking import ScoredList
from .sparse import SparseIndex, score_query
from .textnorm import PipelineConfig

__all__ = ["HybridConfig", "FusionTrace", "fuse", "retrieve_hybrid"]


@dataclass(frozen=True)
class HybridConfig:
    """Fusion settings.

    ``dense_weight`` is the weight on the dense similarity; the sparse channel
    gets the complement.  Euclidean dense scores live on a different scale
    than cosines, so fusing them requires the explicit
    ``allow_euclidean_fusion`` acknowledgement (diagnostic use only).
    """

    dense_weight: float
    sparse_missing_score: float = 0.0
    metric_dense: Metric = "cosine"
    allow_euclidean_fusion: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.dense_weight <= 1.0:
            raise ValueError(f"dense_weight must lie in [0, 1], got {self.dense_weight}")
        if self.metric_dense == "euclidean" and not self.allow_euclidean_fusion:
            raise ValueError(
                "fusing euclidean dense scores mixes incommensurate scales; "
                "set allow_euclidean_fusion=True if you really want this"
            )


@dataclass(frozen=True)
class FusionTrace:
    """Per-document similarity breakdown, in fused ranking order (untruncated)."""

    query_id: str
    rows: tuple[tuple[str, float, float, float], ...]  # (doc_id, dense, sparse, fused)


def fuse(
    dense: ScoredList,
    sparse: ScoredList,
    cfg: HybridConfig,
    k: int | None = None,
) -> tuple[ScoredList, FusionTrace]:
    """Combine two scored lists for the same query.

    ``dense`` must cover the full corpus (dense retrieval never prunes), so
    the candidate union is simply the dense list plus a check; truncation to
    k happens after fusion.
    """
    sparse_scores = dict(sparse.entries)
    missing = sorted(set(sparse_scores) - {d for d, _ in dense.entries})
    if missing:
        raise ValueError(
            f"dense list must cover every sparse candidate; missing {missing[:10]}"
        )
    w = cfg.dense_weight
    fused_rows = []
    for doc_id, dense_sim in dense.entries:
        sparse_sim = sparse_scores.get(doc_id, cfg.sparse_missing_score)
        fused_rows.append((doc_id, dense_sim, sparse_sim, w * dense_sim + (1 - w) * sparse_sim))

    fused_rows.sort(key=lambda r: (-r[3], r[0]))
    trace = FusionTrace(query_id=dense.query_id or sparse.query_id, rows=tuple(fused_rows))
    entries = tuple((doc_id, fused) for doc_id, _, _, fused in fused_rows)
    if k is not None:
        entries = entries[:k]
    return ScoredList(query_id=trace.query_id, entries=entries), trace


def retrieve_hybrid(
    index: SparseIndex,
    store: EmbeddingStore,
    query: QueryRecord,
    query_vec: Sequence[float],
    cfg: HybridConfig,
    pipeline: PipelineConfig,
    k: int | None = None,
) -> ScoredList:
    """Run both retrievers for one query and fuse their scores.

    The sparse index and the embedding store must describe the same corpus;
    any id mismatch is reported as the symmetric difference.
    """
    index_ids = index.doc_ids()
    store_ids = store.id_set()
    if index_ids != store_ids:
        only_index = sorted(index_ids - store_ids)
        only_store = sorted(store_ids - index_ids)
        raise ValueError(
            "sparse index and embedding store cover different corpora: "
            f"only in index {only_index[:10]}, only in store {only_store[:10]}"
        )
    dense = score_query_dense(store, query_vec, cfg.metric_dense, k=None, query_id=query.query_id)
    sparse = score_query(index, query.text, pipeline, k=None, query_id=query.query_id)
    fused, _ = fuse(dense, sparse, cfg, k)
    return fused
