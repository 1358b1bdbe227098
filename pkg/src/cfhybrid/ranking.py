"""Ranked retrieval results and the global ordering convention.

Every retriever emits a :class:`ScoredList`: (doc_id, score) pairs sorted by
descending score with ties broken by ascending doc_id.  The tie-break is part
of the contract so that runs are reproducible bit-for-bit.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

__all__ = ["ScoredList", "rank_entries", "scored_list_to_json", "scored_list_from_json"]


@dataclass(frozen=True)
class ScoredList:
    """Ordered retrieval result for one query."""

    query_id: str
    entries: tuple[tuple[str, float], ...] = ()

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for doc_id, _ in self.entries:
            if doc_id in seen:
                raise ValueError(f"duplicate doc_id {doc_id!r} in scored list")
            seen.add(doc_id)
        for (d1, s1), (d2, s2) in zip(self.entries, self.entries[1:]):
            if s1 < s2 or (s1 == s2 and d1 >= d2):
                raise ValueError(
                    f"entries out of order at {d1!r}/{d2!r}: require descending score, "
                    "ties by ascending doc_id"
                )

    def doc_ids(self) -> list[str]:
        return [doc_id for doc_id, _ in self.entries]

    def truncated(self, k: int | None) -> "ScoredList":
        if k is None:
            return self
        return ScoredList(self.query_id, self.entries[:k])


def rank_entries(
    query_id: str, items: Iterable[tuple[str, float]], k: int | None = None
) -> ScoredList:
    """Sort (doc_id, score) pairs into the global order and truncate to k.

    k=None means 'all'.
    """
    if k is not None and k < 1:
        raise ValueError(f"k must be >= 1 or None, got {k}")
    ordered = sorted(items, key=lambda e: (-e[1], e[0]))
    if k is not None:
        ordered = ordered[:k]
    return ScoredList(query_id=query_id, entries=tuple(ordered))


def scored_list_to_json(sl: ScoredList) -> str:
    return json.dumps(
        {"query_id": sl.query_id, "ranking": [[d, s] for d, s in sl.entries]},
        ensure_ascii=False,
    )


def scored_list_from_json(line: str) -> ScoredList:
    rec = json.loads(line)
    return ScoredList(
        query_id=rec["query_id"],
        entries=tuple((str(d), float(s)) for d, s in rec["ranking"]),
    )
