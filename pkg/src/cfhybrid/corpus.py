"""Corpus parsing for the Cystic Fibrosis collection and normalized JSONL corpora.

Two input families are supported:

* The classic CF distribution layout: plain-text files (``cf74`` .. ``cf79``)
  holding document records, plus a query file (``cfquery``).  Records are
  separated by blank lines; each line either starts a field with a two-letter
  tag at column 0 (``RN AN AU TI SO MJ MN AB EX RF CT`` for documents,
  ``QN QU NR RD`` for queries) or continues the previous field (indented).
* A normalized line-delimited JSON format (one record per line, ``kind``
  field ``"doc"`` or ``"query"``) so synthetic corpora and tests never need
  the real dataset.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator, Mapping

__all__ = [
    "Document",
    "Judgment",
    "QueryRecord",
    "RelevanceView",
    "ParseError",
    "CorpusWarning",
    "parse_cfc_documents",
    "parse_cfc_queries",
    "parse_normalized_corpus",
    "write_normalized_corpus",
    "load_cfc_collection",
    "derive_relevance",
    "unknown_judged_docs",
]

VALID_RATINGS = (0, 1, 2)
RATINGS_PER_JUDGMENT = 4

# Document-file tags we understand.  RF/CT (references/citations) are
# recognised but deliberately dropped.
_DOC_TEXT_TAGS = {"TI", "AB", "EX", "AU", "SO"}
_DOC_SUBJECT_TAGS = {"MJ", "MN"}
_DOC_KNOWN_TAGS = {"RN", "AN", "RF", "CT"} | _DOC_TEXT_TAGS | _DOC_SUBJECT_TAGS
_QUERY_KNOWN_TAGS = {"QN", "QU", "NR", "RD"}


class ParseError(ValueError):
    """Raised when an input stream violates its documented format."""


class CorpusWarning(UserWarning):
    """Non-fatal data irregularity (unknown tag, count mismatch, ...)."""


@dataclass(frozen=True)
class Document:
    """One retrievable record: abstract plus subject phrases, no full text."""

    doc_id: str
    title: str = ""
    abstract: str = ""
    major_subjects: tuple[str, ...] = ()
    minor_subjects: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.doc_id:
            raise ValueError("doc_id must be non-empty")
        if not (self.title or self.abstract or self.major_subjects or self.minor_subjects):
            raise ValueError(f"document {self.doc_id!r} has no content fields")


@dataclass(frozen=True)
class Judgment:
    """Ratings of one document by the four judges, each 0, 1 or 2."""

    doc_id: str
    ratings: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.ratings) != RATINGS_PER_JUDGMENT:
            raise ValueError(
                f"judgment for {self.doc_id!r} has {len(self.ratings)} ratings, "
                f"expected {RATINGS_PER_JUDGMENT}"
            )
        bad = [r for r in self.ratings if r not in VALID_RATINGS]
        if bad:
            raise ValueError(f"judgment for {self.doc_id!r} has ratings outside 0..2: {bad}")


@dataclass(frozen=True)
class QueryRecord:
    """A natural-language query with its graded relevance judgments."""

    query_id: str
    text: str
    judgments: tuple[Judgment, ...] = ()

    def __post_init__(self) -> None:
        if not self.query_id:
            raise ValueError("query_id must be non-empty")
        if not self.text:
            raise ValueError(f"query {self.query_id!r} has empty text")


@dataclass(frozen=True)
class RelevanceView:
    """Binary and graded relevance derived from one query's judgments.

    ``binary_relevant`` holds every judged document at least one judge rated
    marginally relevant; ``graded_gain`` maps exactly those documents to the
    mean of their four ratings (unjudged and all-zero documents carry an
    implicit gain of 0 and are absent).
    """

    binary_relevant: frozenset[str]
    graded_gain: Mapping[str, float] = field(default_factory=dict)


def _canonical_id(raw: str) -> str:
    """Strip leading zeros from purely numeric ids so cross-file references agree."""
    return str(int(raw)) if raw.isdigit() else raw


def _as_bytes(raw: BinaryIO | bytes) -> bytes:
    return raw if isinstance(raw, bytes) else raw.read()


def _tagged_records(data: bytes) -> Iterator[tuple[int, list[tuple[str, str]]]]:
    """Yield (byte_offset, [(tag, text), ...]) per blank-line separated record.

    Continuation lines (or any line not starting with a two-letter tag plus
    whitespace) extend the current field.  Offsets are byte positions of the
    record's first line, for error reporting.
    """
    record: list[tuple[str, str]] = []
    record_offset = 0
    offset = 0
    for raw_line in data.splitlines(keepends=True):
        line = raw_line.decode("latin-1").rstrip("\r\n")
        if not line.strip():
            if record:
                yield record_offset, record
                record = []
        else:
            if not record:
                record_offset = offset
            tag = line[:2]
            is_tag = tag.isalpha() and tag.isupper() and (len(line) == 2 or line[2].isspace())
            if is_tag:
                record.append((tag, line[3:].strip()))
            elif record:
                prev_tag, prev_text = record[-1]
                joined = (prev_text + " " + line.strip()).strip()
                record[-1] = (prev_tag, joined)
            else:
                raise ParseError(f"continuation line at byte offset {offset} precedes any field tag")
        offset += len(raw_line)
    if record:
        yield record_offset, record


def _split_subjects(text: str) -> tuple[str, ...]:
    # Subject phrases are separated by a period followed by whitespace; the
    # final phrase carries a trailing period.
    parts = [p.strip().rstrip(".").strip() for p in text.split(". ")]
    return tuple(p for p in parts if p)


def parse_cfc_documents(raw: BinaryIO | bytes) -> list[Document]:
    """Parse one CF-distribution document file into Documents.

    Field order inside a record does not matter.  ``AB`` holds the abstract;
    records without one may carry an extract in ``EX`` instead, which is used
    as the abstract.  Unknown tags are skipped with a :class:`CorpusWarning`.
    Raises :class:`ParseError` for a record lacking the record-number field.
    """
    docs: list[Document] = []
    last_id = None
    for offset, fields in _tagged_records(_as_bytes(raw)):
        by_tag: dict[str, str] = {}
        for tag, text in fields:
            if tag not in _DOC_KNOWN_TAGS:
                warnings.warn(f"unknown document field tag {tag!r}, ignored", CorpusWarning)
                continue
            if tag in by_tag:
                by_tag[tag] = (by_tag[tag] + " " + text).strip()
            else:
                by_tag[tag] = text
        rn = by_tag.get("RN", "").split()
        if not rn:
            after = f" after document {last_id!r}" if last_id else ""
            raise ParseError(f"record at byte offset {offset}{after} has no record number (RN)")
        doc_id = _canonical_id(rn[0])
        docs.append(
            Document(
                doc_id=doc_id,
                title=by_tag.get("TI", ""),
                abstract=by_tag.get("AB") or by_tag.get("EX", ""),
                major_subjects=_split_subjects(by_tag.get("MJ", "")),
                minor_subjects=_split_subjects(by_tag.get("MN", "")),
            )
        )
        last_id = doc_id
    _ensure_unique_ids(d.doc_id for d in docs)
    return docs


def _parse_rd_pairs(text: str, query_id: str) -> tuple[Judgment, ...]:
    tokens = text.split()
    if len(tokens) % 2 != 0:
        raise ParseError(
            f"query {query_id!r}: RD data has {len(tokens)} tokens, expected doc-id/rating pairs"
        )
    judgments = []
    for doc_tok, rating_tok in zip(tokens[0::2], tokens[1::2]):
        if len(rating_tok) != RATINGS_PER_JUDGMENT or not rating_tok.isdigit():
            raise ParseError(
                f"query {query_id!r}, doc {doc_tok!r}: rating string {rating_tok!r} "
                f"is not {RATINGS_PER_JUDGMENT} digits"
            )
        ratings = tuple(int(c) for c in rating_tok)
        if any(r not in VALID_RATINGS for r in ratings):
            raise ParseError(
                f"query {query_id!r}, doc {doc_tok!r}: rating digit outside 0..2 in {rating_tok!r}"
            )
        judgments.append(Judgment(doc_id=_canonical_id(doc_tok), ratings=ratings))
    return tuple(judgments)


def parse_cfc_queries(raw: BinaryIO | bytes) -> list[QueryRecord]:
    """Parse the CF query file (QN/QU/NR/RD blocks) into QueryRecords.

    A mismatch between NR and the number of parsed judgments is a
    :class:`CorpusWarning`, not an error; historical distributions contain
    known inconsistencies.
    """
    queries: list[QueryRecord] = []
    for offset, fields in _tagged_records(_as_bytes(raw)):
        by_tag: dict[str, str] = {}
        for tag, text in fields:
            if tag not in _QUERY_KNOWN_TAGS:
                warnings.warn(f"unknown query field tag {tag!r}, ignored", CorpusWarning)
                continue
            if tag in by_tag:
                by_tag[tag] = (by_tag[tag] + " " + text).strip()
            else:
                by_tag[tag] = text
        qn = by_tag.get("QN", "").split()
        if not qn:
            raise ParseError(f"query record at byte offset {offset} has no query number (QN)")
        query_id = _canonical_id(qn[0])
        judgments = _parse_rd_pairs(by_tag.get("RD", ""), query_id)
        nr_text = by_tag.get("NR", "").split()
        if nr_text and nr_text[0].isdigit() and int(nr_text[0]) != len(judgments):
            warnings.warn(
                f"query {query_id!r}: NR says {int(nr_text[0])} relevant documents "
                f"but {len(judgments)} judgments parsed",
                CorpusWarning,
            )
        queries.append(QueryRecord(query_id=query_id, text=by_tag.get("QU", ""), judgments=judgments))
    _ensure_unique_ids(q.query_id for q in queries)
    return queries


def load_cfc_collection(directory: str | Path) -> tuple[list[Document], list[QueryRecord]]:
    """Load a CF distribution directory: document files ``cf74``..``cf79`` plus
    a query file whose name starts with ``cfquery``."""
    directory = Path(directory)
    doc_paths = sorted(
        p for p in directory.iterdir()
        if p.is_file() and p.name.lower().startswith("cf") and not p.name.lower().startswith("cfquery")
    )
    if not doc_paths:
        raise ParseError(f"no CF document files (cf74..cf79) found in {directory}")
    docs: list[Document] = []
    for path in doc_paths:
        docs.extend(parse_cfc_documents(path.read_bytes()))
    _ensure_unique_ids(d.doc_id for d in docs)
    query_paths = sorted(p for p in directory.iterdir() if p.name.lower().startswith("cfquery"))
    queries: list[QueryRecord] = []
    for path in query_paths:
        queries.extend(parse_cfc_queries(path.read_bytes()))
    return docs, queries


def derive_relevance(q: QueryRecord) -> RelevanceView:
    """Binarize and average the four ratings of each judged document.

    A document is binary-relevant iff some judge rated it >= 1, which is
    exactly the set of documents whose mean rating is positive.
    """
    gains = {j.doc_id: sum(j.ratings) / RATINGS_PER_JUDGMENT for j in q.judgments}
    positive = {d: g for d, g in gains.items() if g > 0.0}
    return RelevanceView(binary_relevant=frozenset(positive), graded_gain=positive)


def unknown_judged_docs(
    queries: Iterable[QueryRecord], docs: Iterable[Document]
) -> dict[str, list[str]]:
    """Report judgments referencing doc_ids absent from the corpus.

    Such judgments are kept (they count toward recall denominators as
    never-retrievable documents); this check only surfaces them.
    """
    known = {d.doc_id for d in docs}
    report: dict[str, list[str]] = {}
    for q in queries:
        missing = sorted({j.doc_id for j in q.judgments} - known)
        if missing:
            report[q.query_id] = missing
    return report


def _ensure_unique_ids(ids: Iterable[str]) -> None:
    seen: set[str] = set()
    for i in ids:
        if i in seen:
            raise ParseError(f"duplicate id {i!r}")
        seen.add(i)


# --- normalized line-delimited format ------------------------------------

def parse_normalized_corpus(raw: BinaryIO | bytes) -> tuple[list[Document], list[QueryRecord]]:
    """Parse the normalized UTF-8 JSONL corpus format.

    Each line is one object with ``kind`` either ``"doc"`` (fields ``id``,
    ``title``, ``abstract``, ``major``, ``minor``) or ``"query"`` (fields
    ``id``, ``text``, ``judgments`` = list of ``{"doc": id, "ratings": [...]}``).
    """
    docs: list[Document] = []
    queries: list[QueryRecord] = []
    for lineno, line in enumerate(_as_bytes(raw).splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ParseError(f"line {lineno}: invalid record ({exc})") from exc
        if not isinstance(rec, dict) or "kind" not in rec:
            raise ParseError(f"line {lineno}: record must be an object with a 'kind' field")
        try:
            if rec["kind"] == "doc":
                docs.append(
                    Document(
                        doc_id=str(rec["id"]),
                        title=rec.get("title", ""),
                        abstract=rec.get("abstract", ""),
                        major_subjects=tuple(rec.get("major", ())),
                        minor_subjects=tuple(rec.get("minor", ())),
                    )
                )
            elif rec["kind"] == "query":
                judgments = tuple(
                    Judgment(doc_id=str(j["doc"]), ratings=tuple(int(r) for r in j["ratings"]))
                    for j in rec.get("judgments", ())
                )
                queries.append(
                    QueryRecord(query_id=str(rec["id"]), text=rec.get("text", ""), judgments=judgments)
                )
            else:
                raise ParseError(f"line {lineno}: unknown kind {rec['kind']!r}")
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"line {lineno}: {exc}") from exc
    _ensure_unique_ids(d.doc_id for d in docs)
    _ensure_unique_ids(q.query_id for q in queries)
    return docs, queries


def write_normalized_corpus(docs: Iterable[Document], queries: Iterable[QueryRecord]) -> bytes:
    """Serialize to the normalized JSONL format; inverse of parse_normalized_corpus."""
    lines = []
    for d in docs:
        lines.append(
            json.dumps(
                {
                    "kind": "doc",
                    "id": d.doc_id,
                    "title": d.title,
                    "abstract": d.abstract,
                    "major": list(d.major_subjects),
                    "minor": list(d.minor_subjects),
                },
                ensure_ascii=False,
            )
        )
    for q in queries:
        lines.append(
            json.dumps(
                {
                    "kind": "query",
                    "id": q.query_id,
                    "text": q.text,
                    "judgments": [
                        {"doc": j.doc_id, "ratings": list(j.ratings)} for j in q.judgments
                    ],
                },
                ensure_ascii=False,
            )
        )
    return ("\n".join(lines) + "\n").encode("utf-8")
