"""Command-line entry point.

Subcommands: ``index`` (build and persist the sparse index), ``embed-check``
(validate embedding files against a corpus), ``run`` (evaluate one retriever),
``sweep`` (fusion-weight ablation).  Exit codes: 0 success, 1 usage error,
2 data/validation error.

Any flag can also be supplied via a JSON config file (``--config``); values
given on the command line win over the file.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .corpus import ParseError, load_cfc_collection, parse_normalized_corpus, unknown_judged_docs
from .dense import load_embeddings_file
from .experiments import (
    RunSpec,
    default_lambda_grid,
    emit_plot_data,
    run_eval,
    sweep_lambda,
    write_manifest,
    write_rankings,
)
from .metrics import report_csv, report_jsonl
from .sparse import build_index, save_index
from .textnorm import PipelineConfig, default_config, load_stopwords

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; our contract reserves 2 for data errors.
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _add_corpus_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--corpus", type=Path, help="corpus path (CF directory or normalized JSONL file)")
    p.add_argument("--format", choices=["cfc", "norm"], dest="corpus_format",
                   help="corpus format; default: cfc for a directory, norm for a file")
    p.add_argument("--stopwords", type=Path, help="stopword list file (default: built-in list)")
    p.add_argument("--min-token-length", type=int, help="minimum token length (default 1)")


def build_parser() -> _Parser:
    parser = _Parser(prog="cfhybrid", description=__doc__.splitlines()[0])
    parser.add_argument("--config", type=Path, help="JSON file supplying defaults for any flag")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p_index = sub.add_parser("index", parents=[], help="build the sparse index and write it to disk")
    _add_corpus_flags(p_index)
    p_index.add_argument("--out", type=Path, help="output path for the binary index")

    p_check = sub.add_parser("embed-check", help="validate embedding files against a corpus")
    _add_corpus_flags(p_check)
    p_check.add_argument("--doc-emb", type=Path, help="document embedding file (emb-v1)")
    p_check.add_argument("--query-emb", type=Path, help="query embedding file (emb-v1)")

    p_run = sub.add_parser("run", help="evaluate one retriever over all queries")
    _add_corpus_flags(p_run)
    p_run.add_argument("--retriever", choices=["sparse", "dense", "hybrid"])
    p_run.add_argument("--lambda", dest="dense_weight", type=float,
                       help="fusion weight on the dense score (hybrid only)")
    p_run.add_argument("--dense-metric", choices=["cosine", "euclidean"])
    p_run.add_argument("--allow-euclidean-fusion", action="store_true", default=None,
                       help="acknowledge mixing euclidean dense scores into fusion (diagnostic)")
    p_run.add_argument("--k", dest="k_ndcg", type=int, help="NDCG cutoff (default 10)")
    p_run.add_argument("--doc-emb", type=Path)
    p_run.add_argument("--query-emb", type=Path)
    p_run.add_argument("--out", type=Path, help="output directory")
    p_run.add_argument("--figures", action=argparse.BooleanOptionalAction, default=None,
                       help="render PNG figures next to the CSVs (default on)")

    p_sweep = sub.add_parser("sweep", help="hybrid fusion-weight ablation over a grid")
    _add_corpus_flags(p_sweep)
    p_sweep.add_argument("--grid", help="grid as start:stop:step or comma list (default 0:1:0.1)")
    p_sweep.add_argument("--k", dest="k_ndcg", type=int, help="NDCG cutoff (default 10)")
    p_sweep.add_argument("--doc-emb", type=Path)
    p_sweep.add_argument("--query-emb", type=Path)
    p_sweep.add_argument("--out", type=Path, help="output directory")
    p_sweep.add_argument("--figures", action=argparse.BooleanOptionalAction, default=None)

    return parser


def _apply_config_file(args: argparse.Namespace) -> None:
    """Fill in unset options from the JSON config file; flags win over file."""
    if args.config is None:
        return
    try:
        raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config file {args.config}: {exc}") from exc
    if not isinstance(raw, dict):
        raise UsageError(f"config file {args.config} must hold a JSON object")
    for key, value in raw.items():
        attr = key.replace("-", "_")
        if attr == "lambda":
            attr = "dense_weight"
        if attr == "format":
            attr = "corpus_format"
        if attr == "k":
            attr = "k_ndcg"
        if not hasattr(args, attr):
            raise UsageError(f"config file option {key!r} does not apply to this command")
        if getattr(args, attr) is None:
            if attr in ("corpus", "stopwords", "doc_emb", "query_emb", "out"):
                value = Path(value)
            setattr(args, attr, value)


def _require(args: argparse.Namespace, *names: str) -> None:
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join(f"--{n}" for n in missing))


def _load_corpus(args: argparse.Namespace):
    corpus_path: Path = args.corpus
    fmt = args.corpus_format
    if fmt is None:
        fmt = "cfc" if corpus_path.is_dir() else "norm"
    if fmt == "cfc":
        return load_cfc_collection(corpus_path)
    docs, queries = parse_normalized_corpus(corpus_path.read_bytes())
    return docs, queries


def _pipeline(args: argparse.Namespace) -> PipelineConfig:
    if args.stopwords is None and args.min_token_length is None:
        return default_config()
    stopwords = (
        load_stopwords(args.stopwords) if args.stopwords is not None
        else default_config().stopword_set
    )
    return PipelineConfig(
        stopword_set=stopwords,
        min_token_length=args.min_token_length if args.min_token_length is not None else 1,
    )


def _cmd_index(args: argparse.Namespace) -> int:
    _require(args, "corpus", "out")
    docs, _ = _load_corpus(args)
    index = build_index(docs, _pipeline(args))
    args.out.parent.mkdir(parents=True, exist_ok=True)
    save_index(index, args.out)
    print(f"indexed {index.doc_count} documents, {len(index.vocabulary)} terms -> {args.out}")
    return EXIT_OK


def _cmd_embed_check(args: argparse.Namespace) -> int:
    _require(args, "corpus", "doc-emb", "query-emb")
    docs, queries = _load_corpus(args)
    doc_store = load_embeddings_file(args.doc_emb, "document")
    query_store = load_embeddings_file(args.query_emb, "query")

    problems = []
    if doc_store.dim != query_store.dim:
        problems.append(f"dimension mismatch: documents {doc_store.dim}, queries {query_store.dim}")
    corpus_ids = {d.doc_id for d in docs}
    missing_docs = sorted(corpus_ids - doc_store.id_set())
    extra_docs = sorted(doc_store.id_set() - corpus_ids)
    if missing_docs:
        problems.append(f"{len(missing_docs)} documents lack embeddings, e.g. {missing_docs[:5]}")
    if extra_docs:
        problems.append(f"{len(extra_docs)} embeddings have no corpus document, e.g. {extra_docs[:5]}")
    query_ids = {q.query_id for q in queries}
    missing_queries = sorted(query_ids - query_store.id_set())
    if missing_queries:
        problems.append(f"{len(missing_queries)} queries lack embeddings, e.g. {missing_queries[:5]}")

    print(f"documents: {len(docs)} in corpus, {len(doc_store)} embeddings, dim {doc_store.dim}")
    print(f"queries:   {len(queries)} in corpus, {len(query_store)} embeddings, dim {query_store.dim}")
    dangling = unknown_judged_docs(queries, docs)
    if dangling:
        print(f"note: {len(dangling)} queries judge unknown doc ids (kept, never retrievable)")
    for p in problems:
        print(f"FAIL: {p}", file=sys.stderr)
    if problems:
        return EXIT_DATA
    print("embedding files are consistent with the corpus")
    return EXIT_OK


def _cmd_run(args: argparse.Namespace) -> int:
    _require(args, "corpus", "retriever", "out")
    if args.retriever != "hybrid" and args.dense_weight is not None:
        raise UsageError("--lambda applies to the hybrid retriever only")
    if args.retriever in ("dense", "hybrid"):
        _require(args, "doc-emb", "query-emb")

    docs, queries = _load_corpus(args)
    pipeline = _pipeline(args)
    index = build_index(docs, pipeline) if args.retriever in ("sparse", "hybrid") else None
    doc_store = load_embeddings_file(args.doc_emb, "document") if args.doc_emb else None
    query_store = load_embeddings_file(args.query_emb, "query") if args.query_emb else None

    spec = RunSpec(
        retriever=args.retriever,
        dense_weight=args.dense_weight,
        metric_dense=args.dense_metric or "cosine",
        k_ndcg=args.k_ndcg if args.k_ndcg is not None else 10,
        output_dir=args.out,
        allow_euclidean_fusion=bool(args.allow_euclidean_fusion),
    )
    result = run_eval(spec, docs, queries, index, doc_store, query_store, pipeline)

    label = spec.label()
    emit_plot_data(args.out, pr_curves=[(label, result.curve)], ndcg_reports=[(label, result.ndcg)])
    (args.out / "metrics.csv").write_text(report_csv(result.curve, result.ndcg), encoding="utf-8")
    (args.out / "metrics.jsonl").write_text(report_jsonl(result.curve, result.ndcg), encoding="utf-8")
    if args.figures is None or args.figures:
        from .figures import render_ndcg_figure, render_pr_figure

        render_pr_figure(args.out / "pr_curve.png", [(label, result.curve)])
        render_ndcg_figure(args.out / "ndcg.png", [(label, result.ndcg)])

    if result.excluded:
        print(f"excluded {len(result.excluded)} queries with no relevant documents: "
              f"{list(result.excluded)[:5]}")
    print(f"{label}: mean NDCG@{spec.k_ndcg} = {result.ndcg.mean:.4f} "
          f"over {len(result.ndcg.per_query)} queries -> {args.out}")
    return EXIT_OK


def _parse_grid(text: str | None) -> list[float]:
    if text is None:
        return default_lambda_grid()
    try:
        if ":" in text:
            start_s, stop_s, step_s = text.split(":")
            start, stop, step = float(start_s), float(stop_s), float(step_s)
            if step <= 0:
                raise ValueError("step must be positive")
            n = int(round((stop - start) / step))
            values = [round(start + i * step, 10) for i in range(n + 1)]
            return [v for v in values if v <= stop + 1e-12]
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse grid {text!r}: {exc}") from exc


def _cmd_sweep(args: argparse.Namespace) -> int:
    _require(args, "corpus", "doc-emb", "query-emb", "out")
    grid = _parse_grid(args.grid)
    docs, queries = _load_corpus(args)
    pipeline = _pipeline(args)
    index = build_index(docs, pipeline)
    doc_store = load_embeddings_file(args.doc_emb, "document")
    query_store = load_embeddings_file(args.query_emb, "query")
    k_ndcg = args.k_ndcg if args.k_ndcg is not None else 10

    sweep = sweep_lambda(grid, docs, queries, index, doc_store, query_store, pipeline, k_ndcg=k_ndcg)

    args.out.mkdir(parents=True, exist_ok=True)
    pr_curves = [(f"lambda={p.dense_weight!r}", p.curve)
                 for p in sorted(sweep.points, key=lambda p: p.dense_weight)]
    emit_plot_data(args.out, pr_curves=pr_curves, sweep=sweep)
    for point in sweep.points:
        write_rankings(args.out / f"rankings_lambda_{point.dense_weight!r}.jsonl",
                       point.result.rankings)
    write_manifest(
        args.out,
        config={"grid": list(grid), "k_ndcg": k_ndcg, "retriever": "hybrid"},
        docs=docs,
        queries=queries,
        extra={"best_lambda": sweep.best_dense_weight},
    )
    if args.figures is None or args.figures:
        from .figures import render_pr_figure, render_sweep_figure

        render_sweep_figure(args.out / "sweep.png", sweep)
        render_pr_figure(args.out / "pr_curve.png", pr_curves)

    print(f"best lambda = {sweep.best_dense_weight!r} "
          f"(mean NDCG@{k_ndcg} = {max(p.mean_ndcg for p in sweep.points):.4f}) -> {args.out}")
    return EXIT_OK


_COMMANDS = {
    "index": _cmd_index,
    "embed-check": _cmd_embed_check,
    "run": _cmd_run,
    "sweep": _cmd_sweep,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help()
            return EXIT_USAGE
        _apply_config_file(args)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
