"""Graded-relevance evaluation: interpolated precision-recall and NDCG@k.

Precision-recall works on binary relevance (any judge rated the document at
least marginally relevant).  NDCG uses the mean of the four judges' ratings
directly as a linear gain in [0, 2]; unjudged documents carry gain 0 and
count as non-relevant in precision denominators.  Queries without any
relevant document cannot be scored and must be filtered (and reported) by
the caller.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .corpus import RelevanceView
from .ranking import ScoredList

__all__ = [
    "RECALL_LEVELS",
    "PRCurve",
    "NdcgReport",
    "pr_points",
    "interpolate_11pt",
    "mean_pr_curve",
    "ndcg_at_k",
    "ndcg_report",
    "report_csv",
    "report_jsonl",
]

# The 11 standard recall levels 0.0, 0.1, ..., 1.0.
RECALL_LEVELS: tuple[float, ...] = tuple(i / 10 for i in range(11))


@dataclass(frozen=True)
class PRCurve:
    """Interpolated precision at the 11 standard recall levels."""

    interpolated_precision: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.interpolated_precision) != len(RECALL_LEVELS):
            raise ValueError(f"curve needs {len(RECALL_LEVELS)} values")
        for a, b in zip(self.interpolated_precision, self.interpolated_precision[1:]):
            if b > a:
                raise ValueError("interpolated precision must be non-increasing in recall")

    @property
    def recall_levels(self) -> tuple[float, ...]:
        return RECALL_LEVELS


@dataclass(frozen=True)
class NdcgReport:
    """Per-query NDCG@k values and their arithmetic mean."""

    k: int
    per_query: Mapping[str, float]
    mean: float


def pr_points(ranked: ScoredList, rel: RelevanceView) -> list[tuple[float, float]]:
    """(recall, precision) at every rank where a relevant document appears."""
    if not rel.binary_relevant:
        raise ValueError(
            f"query {ranked.query_id!r} has no relevant documents; exclude it upstream"
        )
    total = len(rel.binary_relevant)
    points = []
    hits = 0
    for i, (doc_id, _) in enumerate(ranked.entries, start=1):
        if doc_id in rel.binary_relevant:
            hits += 1
            points.append((hits / total, hits / i))
    return points


def interpolate_11pt(points: Sequence[tuple[float, float]]) -> PRCurve:
    """Interpolated precision: at level r, the best precision at any recall >= r.

    Levels beyond the highest observed recall get 0 (the ranking never got
    there), which makes the curve of a truncating retriever honest.
    """
    values = []
    for level in RECALL_LEVELS:
        candidates = [prec for rec, prec in points if rec >= level]
        values.append(max(candidates) if candidates else 0.0)
    return PRCurve(interpolated_precision=tuple(values))


def mean_pr_curve(curves: Sequence[PRCurve]) -> PRCurve:
    """Macro-average: pointwise mean over queries at each recall level."""
    if not curves:
        raise ValueError("cannot average zero curves")
    n = len(curves)
    means = tuple(
        sum(c.interpolated_precision[i] for c in curves) / n for i in range(len(RECALL_LEVELS))
    )
    return PRCurve(interpolated_precision=means)


def ndcg_at_k(ranked: ScoredList, rel: RelevanceView, k: int) -> float:
    """Normalized discounted cumulative gain over the top k retrievals.

    Gain is the mean judge rating itself (linear, not exponential); the
    discount at rank i is log2(i + 1).  The ideal ordering ranks the judged
    gains descending, so the result lies in [0, 1].
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not rel.graded_gain:
        raise ValueError(
            f"query {ranked.query_id!r} has no positive gains; exclude it upstream"
        )
    dcg = 0.0
    for i, (doc_id, _) in enumerate(ranked.entries[:k], start=1):
        dcg += rel.graded_gain.get(doc_id, 0.0) / math.log2(i + 1)
    ideal = sorted(rel.graded_gain.values(), reverse=True)[:k]
    idcg = sum(g / math.log2(i + 1) for i, g in enumerate(ideal, start=1))
    return dcg / idcg


def ndcg_report(per_query: Mapping[str, float], k: int) -> NdcgReport:
    if not per_query:
        raise ValueError("cannot build an NDCG report with no queries")
    return NdcgReport(k=k, per_query=dict(per_query), mean=sum(per_query.values()) / len(per_query))


# --- report serialization ---------------------------------------------------

def report_csv(curve: PRCurve | None, ndcg: NdcgReport | None) -> str:
    """Flat CSV with columns query_id, metric, k, value.

    Per-query NDCG rows come first (sorted by query id), then the
    macro-averaged interpolated precision per recall level under query_id
    'all' with the level folded into the metric name.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["query_id", "metric", "k", "value"])
    if ndcg is not None:
        for qid in sorted(ndcg.per_query):
            writer.writerow([qid, "ndcg", ndcg.k, ndcg.per_query[qid]])
        writer.writerow(["all", "mean_ndcg", ndcg.k, ndcg.mean])
    if curve is not None:
        for level, prec in zip(RECALL_LEVELS, curve.interpolated_precision):
            writer.writerow(["all", f"interp_precision@{level:.1f}", "", prec])
    return buf.getvalue()


def report_jsonl(curve: PRCurve | None, ndcg: NdcgReport | None) -> str:
    """The same rows as line-delimited JSON records."""
    lines = []
    if ndcg is not None:
        for qid in sorted(ndcg.per_query):
            lines.append(
                json.dumps({"query_id": qid, "metric": "ndcg", "k": ndcg.k, "value": ndcg.per_query[qid]})
            )
        lines.append(json.dumps({"query_id": "all", "metric": "mean_ndcg", "k": ndcg.k, "value": ndcg.mean}))
    if curve is not None:
        for level, prec in zip(RECALL_LEVELS, curve.interpolated_precision):
            lines.append(
                json.dumps(
                    {"query_id": "all", "metric": "interp_precision", "recall": level, "value": prec}
                )
            )
    return "\n".join(lines) + "\n" if lines else ""
