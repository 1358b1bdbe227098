"""Tokenization rules and their invariants."""
from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from cfhybrid.corpus import Document
from cfhybrid.textnorm import (
    PipelineConfig,
    default_config,
    document_text,
    load_stopwords,
    tokenize,
)

from oracles import naive_tokenize

ascii_text = st.text(st.characters(min_codepoint=32, max_codepoint=126), max_size=60)


def cfg(stopwords=(), min_len=1):
    return PipelineConfig(stopword_set=frozenset(stopwords), min_token_length=min_len)


class TestTokenize:
    def test_stopwords_removed(self):
        assert tokenize("The mucus of CF patients", cfg({"the", "of"})) == [
            "mucus",
            "cf",
            "patients",
        ]

    def test_empty_text(self):
        assert tokenize("", cfg()) == []

    def test_internal_hyphen_kept(self):
        assert tokenize("Pseudomonas-aeruginosa infection", cfg()) == [
            "pseudomonas-aeruginosa",
            "infection",
        ]

    def test_edge_hyphens_stripped(self):
        assert tokenize("-abc- -x", cfg()) == ["abc", "x"]

    def test_double_hyphen_splits(self):
        assert tokenize("a--b", cfg()) == ["a", "b"]

    def test_digits_are_tokens(self):
        assert tokenize("stage 2 trial", cfg()) == ["stage", "2", "trial"]

    def test_punctuation_separates(self):
        assert tokenize("gland; secretion, (sweat)!", cfg()) == ["gland", "secretion", "sweat"]

    def test_min_token_length(self):
        assert tokenize("a bc def", cfg(min_len=2)) == ["bc", "def"]

    def test_matches_character_scan_oracle(self):
        samples = [
            "The mucus of CF patients",
            "2,4-diene intake -- high-dose",
            "alpha--beta-gamma 7-up --",
            "x-1-y z9 -",
        ]
        for text in samples:
            assert tokenize(text, cfg()) == naive_tokenize(text, frozenset())

    @given(ascii_text)
    def test_oracle_agreement_on_random_ascii(self, text):
        assert tokenize(text, cfg()) == naive_tokenize(text, frozenset())

    @given(ascii_text)
    def test_idempotent_at_token_level(self, text):
        c = cfg({"the", "of", "and"}, min_len=2)
        once = tokenize(text, c)
        assert tokenize(" ".join(once), c) == once

    @given(ascii_text)
    def test_case_insensitive(self, text):
        c = cfg()
        assert tokenize(text.upper(), c) == tokenize(text, c)

    @given(ascii_text, st.sets(st.sampled_from(["a", "b", "the", "x1", "of"])))
    def test_enlarging_stopwords_never_adds_tokens(self, text, extra):
        base = cfg({"the"})
        bigger = cfg({"the", *extra})
        assert set(tokenize(text, bigger)) <= set(tokenize(text, base))

    def test_tokens_never_contain_stopwords_or_whitespace(self):
        c = default_config()
        toks = tokenize("This is a Standard English sentence about chloride.", c)
        assert toks == ["standard", "english", "sentence", "chloride"]
        assert all(" " not in t for t in toks)


class TestDocumentText:
    def test_fixed_field_order(self):
        d = Document("1", title="A", abstract="B", major_subjects=("C",), minor_subjects=("D",))
        assert document_text(d) == "A B C D"

    def test_empty_fields_skipped(self):
        d = Document("1", abstract="X")
        assert document_text(d) == "X"

    def test_subjects_flattened_like_prose(self):
        d = Document("1", title="t", major_subjects=("ION-TRANSPORT: ph",))
        assert tokenize(document_text(d), cfg()) == ["t", "ion-transport", "ph"]


class TestConfig:
    def test_min_token_length_validated(self):
        with pytest.raises(ValueError, match="min_token_length"):
            PipelineConfig(min_token_length=0)

    def test_stopwords_must_be_lowercase(self):
        with pytest.raises(ValueError, match="lowercase"):
            PipelineConfig(stopword_set=frozenset({"The"}))

    def test_load_stopwords_skips_comments(self, tmp_path):
        f = tmp_path / "stop.txt"
        f.write_text("# a comment\nthe\nof  # trailing\n\nAND\n")
        assert load_stopwords(f) == frozenset({"the", "of", "and"})

    def test_default_list_is_standard_english(self):
        words = default_config().stopword_set
        assert {"the", "of", "and", "is", "a"} <= words
        assert "chloride" not in words
        assert len(words) > 100
