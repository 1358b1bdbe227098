"""End-to-end evaluation runs: sparse/dense/hybrid over a query set, the
fusion-weight sweep, and plot-ready CSV emission.

Everything here is deterministic given its inputs: rankings use the global
tie-break, queries are processed in corpus order, and CSV rows have a fixed
order, so identical runs produce byte-identical outputs.  The run manifest
(config hash, corpus checksum, timestamp) is the one exception and lives in
its own file.
"""
from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Literal, Mapping, Sequence

from .corpus import Document, QueryRecord, derive_relevance, write_normalized_corpus
from .dense import EmbeddingStore, Metric, score_query_dense
from .hybrid import HybridConfig, retrieve_hybrid
from .metrics import NdcgReport, PRCurve, RECALL_LEVELS, interpolate_11pt, mean_pr_curve, ndcg_at_k, ndcg_report, pr_points
from .ranking import ScoredList, scored_list_to_json
from .sparse import SparseIndex, score_query
from .textnorm import PipelineConfig

__all__ = [
    "RunSpec",
    "EvalResult",
    "SweepPoint",
    "SweepResult",
    "run_eval",
    "sweep_lambda",
    "default_lambda_grid",
    "emit_plot_data",
    "write_rankings",
]

Retriever = Literal["sparse", "dense", "hybrid"]


@dataclass(frozen=True)
class RunSpec:
    """One experimental condition.

    ``dense_weight`` is the hybrid fusion weight and must be present exactly
    when the retriever is hybrid.
    """

    retriever: Retriever
    dense_weight: float | None = None
    metric_dense: Metric = "cosine"
    k_ndcg: int = 10
    output_dir: Path | None = None
    allow_euclidean_fusion: bool = False

    def __post_init__(self) -> None:
        if self.retriever not in ("sparse", "dense", "hybrid"):
            raise ValueError(f"unknown retriever {self.retriever!r}")
        if (self.dense_weight is None) == (self.retriever == "hybrid"):
            raise ValueError("dense_weight must be given for hybrid runs and only for them")
        if self.k_ndcg < 1:
            raise ValueError(f"k_ndcg must be >= 1, got {self.k_ndcg}")

    def label(self) -> str:
        if self.retriever == "hybrid":
            return f"hybrid(lambda={self.dense_weight!r})"
        return self.retriever


@dataclass(frozen=True)
class EvalResult:
    curve: PRCurve
    ndcg: NdcgReport
    rankings: Mapping[str, ScoredList]  # full, untruncated, keyed by query id
    excluded: tuple[str, ...]  # queries with no relevant documents


@dataclass(frozen=True)
class SweepPoint:
    dense_weight: float
    mean_ndcg: float
    curve: PRCurve
    result: EvalResult


@dataclass(frozen=True)
class SweepResult:
    points: tuple[SweepPoint, ...]
    best_dense_weight: float


def default_lambda_grid() -> list[float]:
    return [round(i / 10, 10) for i in range(11)]


def _rank_one(
    spec: RunSpec,
    query: QueryRecord,
    index: SparseIndex | None,
    doc_store: EmbeddingStore | None,
    query_store: EmbeddingStore | None,
    pipeline: PipelineConfig,
) -> ScoredList:
    if spec.retriever == "sparse":
        assert index is not None
        return score_query(index, query.text, pipeline, k=None, query_id=query.query_id)
    assert doc_store is not None and query_store is not None
    query_vec = query_store.vector(query.query_id)
    if spec.retriever == "dense":
        return score_query_dense(
            doc_store, query_vec, spec.metric_dense, k=None, query_id=query.query_id
        )
    assert index is not None
    cfg = HybridConfig(
        dense_weight=spec.dense_weight,  # type: ignore[arg-type]
        metric_dense=spec.metric_dense,
        allow_euclidean_fusion=spec.allow_euclidean_fusion,
    )
    return retrieve_hybrid(index, doc_store, query, query_vec, cfg, pipeline, k=None)


def run_eval(
    spec: RunSpec,
    docs: Sequence[Document],
    queries: Sequence[QueryRecord],
    index: SparseIndex | None,
    doc_store: EmbeddingStore | None,
    query_store: EmbeddingStore | None,
    pipeline: PipelineConfig,
) -> EvalResult:
    """Evaluate one retriever over the full query set.

    Queries without any relevant document are excluded from the averages and
    reported in ``EvalResult.excluded`` (and the manifest).  Dense and hybrid
    runs fail up front if any evaluated query lacks an embedding, listing the
    missing ids.  When ``spec.output_dir`` is set, the manifest and the
    per-query rankings are written there.
    """
    views = {q.query_id: derive_relevance(q) for q in queries}
    evaluated = [q for q in queries if views[q.query_id].binary_relevant]
    excluded = tuple(q.query_id for q in queries if not views[q.query_id].binary_relevant)
    if not evaluated:
        raise ValueError("no query has any relevant document; nothing to evaluate")

    if spec.retriever in ("dense", "hybrid"):
        if doc_store is None or query_store is None:
            raise ValueError(f"{spec.retriever} runs need document and query embeddings")
        missing = [q.query_id for q in evaluated if q.query_id not in query_store]
        if missing:
            raise ValueError(f"missing query embeddings for ids: {missing}")

    rankings: dict[str, ScoredList] = {}
    per_query_ndcg: dict[str, float] = {}
    curves = []
    for q in evaluated:
        ranked = _rank_one(spec, q, index, doc_store, query_store, pipeline)
        rankings[q.query_id] = ranked
        rel = views[q.query_id]
        per_query_ndcg[q.query_id] = ndcg_at_k(ranked, rel, spec.k_ndcg)
        curves.append(interpolate_11pt(pr_points(ranked, rel)))

    result = EvalResult(
        curve=mean_pr_curve(curves),
        ndcg=ndcg_report(per_query_ndcg, spec.k_ndcg),
        rankings=rankings,
        excluded=excluded,
    )
    if spec.output_dir is not None:
        out = Path(spec.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_rankings(out / "rankings.jsonl", result.rankings)
        write_manifest(
            out,
            config={
                "retriever": spec.retriever,
                "lambda": spec.dense_weight,
                "metric_dense": spec.metric_dense,
                "k_ndcg": spec.k_ndcg,
            },
            docs=docs,
            queries=queries,
            extra={"queries_evaluated": len(evaluated), "queries_excluded": list(excluded)},
        )
    return result


def sweep_lambda(
    grid: Sequence[float],
    docs: Sequence[Document],
    queries: Sequence[QueryRecord],
    index: SparseIndex,
    doc_store: EmbeddingStore,
    query_store: EmbeddingStore,
    pipeline: PipelineConfig,
    k_ndcg: int = 10,
) -> SweepResult:
    """Run the hybrid retriever at every fusion weight in the grid.

    The best weight maximizes mean NDCG@k, ties going to the smaller weight.
    """
    if not grid:
        raise ValueError("sweep grid must be non-empty")
    if len(set(grid)) != len(grid):
        raise ValueError("sweep grid values must be unique")
    bad = [w for w in grid if not 0.0 <= w <= 1.0]
    if bad:
        raise ValueError(f"sweep grid values outside [0, 1]: {bad}")

    points = []
    for w in grid:
        spec = RunSpec(retriever="hybrid", dense_weight=w, k_ndcg=k_ndcg)
        result = run_eval(spec, docs, queries, index, doc_store, query_store, pipeline)
        points.append(
            SweepPoint(dense_weight=w, mean_ndcg=result.ndcg.mean, curve=result.curve, result=result)
        )
    best = max(points, key=lambda p: (p.mean_ndcg, -p.dense_weight))
    return SweepResult(points=tuple(points), best_dense_weight=best.dense_weight)


# --- output files -----------------------------------------------------------

def write_rankings(path: str | Path, rankings: Mapping[str, ScoredList]) -> None:
    """Persist per-query scored lists as JSONL, one query per line, id order."""
    lines = [scored_list_to_json(rankings[qid]) for qid in sorted(rankings)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def corpus_checksum(docs: Sequence[Document], queries: Sequence[QueryRecord]) -> str:
    """Format-independent corpus fingerprint (sha256 of the normalized form)."""
    return hashlib.sha256(write_normalized_corpus(docs, queries)).hexdigest()


def write_manifest(
    out_dir: Path,
    config: Mapping[str, object],
    docs: Sequence[Document],
    queries: Sequence[QueryRecord],
    extra: Mapping[str, object] | None = None,
) -> None:
    config_blob = json.dumps(config, sort_keys=True)
    manifest = {
        "config": config,
        "config_hash": hashlib.sha256(config_blob.encode("utf-8")).hexdigest(),
        "corpus_checksum": corpus_checksum(docs, queries),
        "doc_count": len(docs),
        "query_count": len(queries),
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    if extra:
        manifest.update(extra)
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def emit_plot_data(
    out_dir: str | Path,
    pr_curves: Sequence[tuple[str, PRCurve]] = (),
    ndcg_reports: Sequence[tuple[str, NdcgReport]] = (),
    sweep: SweepResult | None = None,
) -> list[Path]:
    """Write the plot-ready CSVs for whatever results are given.

    Files: pr_curve.csv (recall_level, precision, run_label), ndcg.csv
    (query_id, ndcg, run_label), sweep.csv (lambda, mean_ndcg).  Column and
    row order are fixed so reruns are byte-identical.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    if pr_curves:
        path = out / "pr_curve.csv"
        with path.open("w", encoding="utf-8", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["recall_level", "precision", "run_label"])
            for label, curve in pr_curves:
                for level, prec in zip(RECALL_LEVELS, curve.interpolated_precision):
                    w.writerow([f"{level:.1f}", prec, label])
        written.append(path)

    if ndcg_reports:
        path = out / "ndcg.csv"
        with path.open("w", encoding="utf-8", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["query_id", "ndcg", "run_label"])
            for label, report in ndcg_reports:
                for qid in sorted(report.per_query):
                    w.writerow([qid, report.per_query[qid], label])
        written.append(path)

    if sweep is not None:
        path = out / "sweep.csv"
        with path.open("w", encoding="utf-8", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["lambda", "mean_ndcg"])
            for point in sorted(sweep.points, key=lambda p: p.dense_weight):
                w.writerow([point.dense_weight, point.mean_ndcg])
        written.append(path)

    return written
