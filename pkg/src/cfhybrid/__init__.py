"""Hybrid sparse+dense document retrieval and evaluation on the Cystic
Fibrosis collection (and any corpus in the normalized format).

The pieces compose left to right: parse a corpus, build the TF/IDF inverted
index, load precomputed embeddings, score queries through either channel or
their weighted fusion, then evaluate with interpolated precision-recall and
NDCG@k.
"""
from .corpus import (
    CorpusWarning,
    Document,
    Judgment,
    ParseError,
    QueryRecord,
    RelevanceView,
    derive_relevance,
    load_cfc_collection,
    parse_cfc_documents,
    parse_cfc_queries,
    parse_normalized_corpus,
    write_normalized_corpus,
)
from .dense import (
    EmbeddingStore,
    cosine_similarity,
    euclidean_score,
    load_embeddings,
    load_embeddings_file,
    score_query_dense,
    write_embeddings,
)
from .experiments import (
    EvalResult,
    RunSpec,
    SweepResult,
    default_lambda_grid,
    emit_plot_data,
    run_eval,
    sweep_lambda,
)
from .hybrid import FusionTrace, HybridConfig, fuse, retrieve_hybrid
from .metrics import (
    NdcgReport,
    PRCurve,
    RECALL_LEVELS,
    interpolate_11pt,
    mean_pr_curve,
    ndcg_at_k,
    pr_points,
)
from .ranking import ScoredList, rank_entries
from .sparse import SparseIndex, build_index, load_index, save_index, score_query, tfidf_weight
from .textnorm import PipelineConfig, default_config, document_text, load_stopwords, tokenize

__version__ = "0.1.0"
