"""Inverted index construction, TF/IDF weighting, cosine scoring, persistence.

The scoring oracle builds explicit per-document weight dictionaries and full
vectors; the engine must match it to 1e-9 for every document.
"""
from __future__ import annotations

import math
import random

import pytest

from cfhybrid.corpus import Document
from cfhybrid.ranking import ScoredList
from cfhybrid.sparse import (
    Posting,
    build_index,
    load_index,
    save_index,
    score_query,
    tfidf_weight,
)
from cfhybrid.textnorm import PipelineConfig, document_text, tokenize

from oracles import (
    naive_query_vector,
    naive_rank,
    naive_sparse_cosine,
    naive_tfidf_vectors,
    naive_tokenize,
)

CFG = PipelineConfig()


def make_docs(texts: dict[str, str]) -> list[Document]:
    return [Document(doc_id, abstract=text) for doc_id, text in texts.items()]


def oracle_scores(texts: dict[str, str], query: str) -> dict[str, float]:
    """Full-vector TF/IDF cosine for every document, zero scores dropped."""
    doc_tokens = {d: naive_tokenize(t, frozenset()) for d, t in texts.items()}
    vectors, df, n = naive_tfidf_vectors(doc_tokens)
    qvec = naive_query_vector(naive_tokenize(query, frozenset()), df, n)
    out = {}
    for doc_id, dvec in vectors.items():
        s = naive_sparse_cosine(qvec, dvec)
        if s != 0.0:
            out[doc_id] = s
    return out


def random_corpus(rng: random.Random, max_docs=50, max_vocab=200) -> dict[str, str]:
    vocab = [f"w{i}" for i in range(rng.randint(2, max_vocab))]
    n_docs = rng.randint(1, max_docs)
    return {
        f"d{i:03d}": " ".join(rng.choices(vocab, k=rng.randint(1, 30)))
        for i in range(n_docs)
    }


class TestBuildIndex:
    def test_vocabulary_and_df(self):
        index = build_index(make_docs({"d1": "a b", "d2": "b c"}), CFG)
        assert set(index.vocabulary) == {"a", "b", "c"}
        assert index.doc_freq("b") == 2
        assert index.vocabulary["b"] == (Posting(0, 1), Posting(1, 1))

    def test_term_frequency_counted(self):
        index = build_index(make_docs({"d1": "x x x"}), CFG)
        assert index.vocabulary["x"] == (Posting(0, 3),)

    def test_postings_sorted_unique(self):
        texts = {f"d{i}": "shared unique{}".format(i) for i in range(8)}
        index = build_index(make_docs(texts), CFG)
        ordinals = [p.doc_ordinal for p in index.vocabulary["shared"]]
        assert ordinals == sorted(set(ordinals))

    def test_norms_match_oracle(self):
        texts = {"d1": "a a b", "d2": "b c", "d3": "c c c d"}
        index = build_index(make_docs(texts), CFG)
        vectors, _, _ = naive_tfidf_vectors(
            {d: naive_tokenize(t, frozenset()) for d, t in texts.items()}
        )
        for ordinal, doc_id in enumerate(index.doc_table):
            expected = math.sqrt(sum(w * w for w in vectors[doc_id].values()))
            assert index.doc_norms[ordinal] == pytest.approx(expected, abs=1e-12)

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError, match="empty corpus"):
            build_index([], CFG)

    def test_duplicate_ids_rejected(self):
        docs = [Document("1", abstract="a"), Document("1", abstract="b")]
        with pytest.raises(ValueError, match="duplicate"):
            build_index(docs, CFG)


class TestTfidfWeight:
    def test_idf_vanishes_when_df_equals_n(self):
        assert tfidf_weight(1, 5, 5) == 0.0
        assert tfidf_weight(7, 5, 5) == 0.0

    def test_unit_case(self):
        # tf=1 contributes factor 1; idf = ln(N/df)
        assert tfidf_weight(1, 1, 10) == pytest.approx(math.log(10), abs=1e-15)

    def test_derived_value(self):
        # independently computed: (1 + ln 3) * ln 5 = 3.37758618088255210...
        assert tfidf_weight(3, 2, 10) == pytest.approx(3.3775861808825521, abs=1e-12)

    def test_preconditions(self):
        for tf, df, n in [(0, 1, 1), (1, 0, 1), (1, 2, 1)]:
            with pytest.raises(ValueError):
                tfidf_weight(tf, df, n)


class TestScoreQuery:
    def test_identical_query_scores_one(self):
        # cosine of a vector with itself; needs idf > 0, so two disjoint docs
        index = build_index(make_docs({"d1": "sweat gland", "d2": "mucus airway"}), CFG)
        result = score_query(index, "sweat gland", CFG)
        assert result.doc_ids() == ["d1"]
        assert result.entries[0][1] == pytest.approx(1.0, abs=1e-12)

    def test_corpus_universal_terms_carry_no_signal(self):
        # df == N means idf 0: such terms can never surface a document
        index = build_index(make_docs({"d1": "common", "d2": "common rare"}), CFG)
        assert score_query(index, "common", CFG).entries == ()
        assert score_query(index, "rare", CFG).doc_ids() == ["d2"]

    def test_stopword_only_query_is_empty(self):
        index = build_index(make_docs({"d1": "sweat gland", "d2": "mucus"}), CFG)
        c = PipelineConfig(stopword_set=frozenset({"the", "of"}))
        assert score_query(index, "the of the", c).entries == ()

    def test_out_of_vocabulary_query_is_empty(self):
        index = build_index(make_docs({"d1": "sweat gland", "d2": "mucus"}), CFG)
        assert score_query(index, "zebra", CFG).entries == ()

    def test_only_term_sharing_docs_scored(self):
        index = build_index(make_docs({"d1": "sweat", "d2": "mucus", "d3": "sweat mucus"}), CFG)
        result = score_query(index, "sweat", CFG)
        assert set(result.doc_ids()) == {"d1", "d3"}

    def test_truncation(self):
        index = build_index(make_docs({"d1": "a x", "d2": "a a y", "d3": "a b", "d4": "z"}), CFG)
        assert len(score_query(index, "a", CFG, k=2).entries) == 2
        assert len(score_query(index, "a", CFG).entries) == 3

    def test_scores_in_unit_interval(self):
        rng = random.Random(7)
        for _ in range(20):
            texts = random_corpus(rng, max_docs=15, max_vocab=30)
            index = build_index(make_docs(texts), CFG)
            query = " ".join(rng.choices([f"w{i}" for i in range(30)], k=5))
            for _, score in score_query(index, query, CFG).entries:
                assert 0.0 <= score <= 1.0 + 1e-12

    def test_matches_full_vector_oracle(self):
        texts = {
            "d1": "chloride transport sweat gland",
            "d2": "mucus airway obstruction",
            "d3": "chloride chloride defect",
            "d4": "sweat sodium chloride sweat",
            "d5": "pancreatic enzyme",
        }
        index = build_index(make_docs(texts), CFG)
        result = score_query(index, "chloride sweat defect", CFG)
        expected = oracle_scores(texts, "chloride sweat defect")
        assert set(result.doc_ids()) == set(expected)
        for doc_id, score in result.entries:
            assert score == pytest.approx(expected[doc_id], abs=1e-9)

    def test_random_corpora_match_oracle(self):
        rng = random.Random(42)
        for _ in range(25):
            texts = random_corpus(rng)
            vocab_here = sorted({t for txt in texts.values() for t in txt.split()})
            query = " ".join(rng.choices(vocab_here, k=rng.randint(1, 6)))
            index = build_index(make_docs(texts), CFG)
            got = dict(score_query(index, query, CFG).entries)
            expected = oracle_scores(texts, query)
            assert set(got) == set(expected)
            for doc_id in got:
                assert got[doc_id] == pytest.approx(expected[doc_id], abs=1e-9)

    def test_tie_break_ascending_doc_id(self):
        index = build_index(make_docs({"b": "x", "a": "x", "c": "y"}), CFG)
        result = score_query(index, "x", CFG)
        assert result.doc_ids() == ["a", "b"]

    def test_deterministic(self):
        texts = random_corpus(random.Random(3))
        index1 = build_index(make_docs(texts), CFG)
        index2 = build_index(make_docs(texts), CFG)
        q = "w1 w2 w3"
        assert score_query(index1, q, CFG) == score_query(index2, q, CFG)

    def test_adding_query_term_never_decreases_dot_product(self):
        # unnormalized dot product monotonicity, checked via the oracle vectors
        rng = random.Random(11)
        for _ in range(30):
            texts = random_corpus(rng, max_docs=12, max_vocab=20)
            doc_id = rng.choice(sorted(texts))
            term = rng.choice(sorted({t for txt in texts.values() for t in txt.split()}))
            query = f"{term} w0"

            def dot(txts):
                toks = {d: naive_tokenize(t, frozenset()) for d, t in txts.items()}
                vectors, df, n = naive_tfidf_vectors(toks)
                qv = naive_query_vector(naive_tokenize(query, frozenset()), df, n)
                dv = vectors[doc_id]
                return sum(qv[t] * dv[t] for t in qv if t in dv)

            grown = dict(texts)
            grown[doc_id] = grown[doc_id] + " " + term
            assert dot(grown) >= dot(texts) - 1e-12


class TestPersistence:
    def test_round_trip(self, tmp_path):
        texts = random_corpus(random.Random(5))
        index = build_index(make_docs(texts), CFG)
        path = tmp_path / "corpus.spix"
        save_index(index, path)
        loaded = load_index(path)
        assert loaded.doc_table == index.doc_table
        assert loaded.doc_norms == index.doc_norms
        assert loaded.vocabulary == index.vocabulary

    def test_scoring_identical_after_reload(self, tmp_path):
        texts = random_corpus(random.Random(6))
        index = build_index(make_docs(texts), CFG)
        path = tmp_path / "corpus.spix"
        save_index(index, path)
        loaded = load_index(path)
        q = "w0 w1 w2 w3"
        assert score_query(loaded, q, CFG) == score_query(index, q, CFG)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "bogus.spix"
        path.write_bytes(b"NOPE" + b"\x00" * 16)
        with pytest.raises(ValueError, match="bad magic"):
            load_index(path)

    def test_unsupported_version_rejected(self, tmp_path):
        path = tmp_path / "future.spix"
        path.write_bytes(b"SPIX\x09" + b"\x00" * 16)
        with pytest.raises(ValueError, match="version"):
            load_index(path)


class TestScoredListInvariants:
    def test_rejects_duplicates(self):
        with pytest.raises(ValueError, match="duplicate"):
            ScoredList("q", (("a", 1.0), ("a", 0.5)))

    def test_rejects_misordered_scores(self):
        with pytest.raises(ValueError, match="out of order"):
            ScoredList("q", (("a", 0.5), ("b", 1.0)))

    def test_rejects_misordered_ties(self):
        with pytest.raises(ValueError, match="out of order"):
            ScoredList("q", (("b", 1.0), ("a", 1.0)))
