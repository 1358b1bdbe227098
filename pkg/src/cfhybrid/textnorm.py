"""Shared text normalization: tokenization, case folding, stopword removal.

Indexing and querying must agree on this pipeline, so both take the same
:class:`PipelineConfig`.  Tokens are maximal alphanumeric runs, lowercased,
with single internal hyphens preserved (``pseudomonas-aeruginosa`` stays one
token) and leading/trailing hyphens stripped.  No stemming.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .corpus import Document

__all__ = ["PipelineConfig", "default_config", "load_stopwords", "tokenize", "document_text"]

# Lowercase alphanumeric runs joined by single internal hyphens.
DEFAULT_TOKEN_PATTERN = r"[a-z0-9]+(?:-[a-z0-9]+)*"


@dataclass(frozen=True)
class PipelineConfig:
    """Tokenizer settings; stopword entries must already be lowercase."""

    stopword_set: frozenset[str] = frozenset()
    min_token_length: int = 1
    token_pattern: str = DEFAULT_TOKEN_PATTERN

    def __post_init__(self) -> None:
        if self.min_token_length < 1:
            raise ValueError("min_token_length must be >= 1")
        not_lower = [w for w in self.stopword_set if w != w.lower()]
        if not_lower:
            raise ValueError(f"stopword entries must be lowercase: {not_lower[:5]}")


def load_stopwords(path: str | Path) -> frozenset[str]:
    """Read a stopword file: UTF-8, one word per line, '#' comments allowed."""
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        word = line.split("#", 1)[0].strip()
        if word:
            words.add(word.lower())
    return frozenset(words)


def default_config() -> PipelineConfig:
    """Pipeline with the checked-in standard English stopword list."""
    ref = resources.files("cfhybrid.data").joinpath("stopwords_en.txt")
    with resources.as_file(ref) as path:
        return PipelineConfig(stopword_set=load_stopwords(path))


@lru_cache(maxsize=16)
def _compiled(pattern: str) -> re.Pattern[str]:
    return re.compile(pattern)


def tokenize(text: str, cfg: PipelineConfig) -> list[str]:
    """Lowercase, extract tokens, drop stopwords and too-short tokens.

    Deterministic and stateless; applied identically to documents and queries.
    """
    return [
        tok
        for tok in _compiled(cfg.token_pattern).findall(text.lower())
        if len(tok) >= cfg.min_token_length and tok not in cfg.stopword_set
    ]


def document_text(d: Document) -> str:
    """Flatten a Document to the text the index sees: title, abstract, then
    major and minor subject phrases, space-separated."""
    parts = [d.title, d.abstract, *d.major_subjects, *d.minor_subjects]
    return " ".join(p for p in parts if p)
