"""Command-line interface: run, grid, sweep, export-topics, score.

Flags mirror the pipeline config; ``--config FILE`` takes precedence over
flags for any key the file sets. Exit codes: 0 success, 1 configuration
error, 2 partial grid failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import coherence as coherence_mod
from . import corpus as corpus_mod
from .errors import ConfigError, TopicPipeError
from .pipeline import (
    PipelineConfig,
    RunReport,
    config_from_dict,
    grid_run,
    load_grid_configs,
    run_pipeline,
    topic_sweep,
)
from .topics import TopicSet


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="TOML config file; overrides flags")
    parser.add_argument("--corpus", help="corpus JSONL path")
    parser.add_argument("--stopwords", help="stopword list path")
    parser.add_argument("--ngram-range", default=None, help="e.g. 1,3")
    parser.add_argument("--min-count", type=int, default=None)
    parser.add_argument("--embedding", choices=["hash", "file"], default=None)
    parser.add_argument("--embedding-path", help="EMB1 file when --embedding file")
    parser.add_argument("--dim", type=int, default=None, help="hash embedding dimension")
    parser.add_argument("--hash-seed", type=int, default=None)
    parser.add_argument("--reducer", choices=["pca", "kpca", "svd"], default=None)
    parser.add_argument("--n-components", type=int, default=None)
    parser.add_argument("--kernel", choices=["rbf", "linear"], default=None)
    parser.add_argument("--gamma", type=float, default=None)
    parser.add_argument("--clusterer", choices=["kmeans", "agglomerative", "dbscan"], default=None)
    parser.add_argument("--n-clusters", type=int, default=None)
    parser.add_argument("--eps", type=float, default=None)
    parser.add_argument("--min-samples", type=int, default=None)
    parser.add_argument("--n-topics", default=None, help="int or 'unspecified'")
    parser.add_argument("--n-terms", type=int, default=None)
    parser.add_argument("--metrics", default=None, help="comma list from {cv,umass}")
    parser.add_argument("--window", type=int, default=None, help="cv window width")
    parser.add_argument("--seed", type=int, default=None)


def _flags_to_dict(args: argparse.Namespace) -> dict:
    obj: dict = {}
    if args.corpus:
        obj["corpus"] = args.corpus
    if args.seed is not None:
        obj["seed"] = args.seed
    if args.n_topics is not None:
        try:
            obj["n_topics"] = int(args.n_topics)
        except ValueError:
            obj["n_topics"] = args.n_topics  # "unspecified" or rejected by validate

    corpus_opts = {}
    if args.stopwords:
        corpus_opts["stopwords"] = args.stopwords
    if args.ngram_range:
        lo, hi = args.ngram_range.split(",")
        corpus_opts["ngram_range"] = [int(lo), int(hi)]
    if args.min_count is not None:
        corpus_opts["min_count"] = args.min_count
    if corpus_opts:
        obj["corpus_opts"] = corpus_opts
    embedding = {}
    if args.embedding:
        embedding["source"] = args.embedding
    if args.embedding_path:
        embedding.setdefault("source", "file")
        embedding["path"] = args.embedding_path
    if args.dim is not None:
        embedding["dim"] = args.dim
    if args.hash_seed is not None:
        embedding["seed"] = args.hash_seed
    if embedding:
        obj["embedding"] = embedding
    reducer = {}
    if args.reducer:
        reducer["kind"] = args.reducer
    if args.n_components is not None:
        reducer["n_components"] = args.n_components
    if args.kernel:
        reducer["kernel"] = args.kernel
    if args.gamma is not None:
        reducer["gamma"] = args.gamma
    if reducer:
        obj["reducer"] = reducer
    clusterer = {}
    if args.clusterer:
        clusterer["kind"] = args.clusterer
    if args.n_clusters is not None:
        clusterer["n_clusters"] = args.n_clusters
    if args.eps is not None:
        clusterer["eps"] = args.eps
    if args.min_samples is not None:
        clusterer["min_samples"] = args.min_samples
    if clusterer:
        obj["clusterer"] = clusterer
    evaluation = {}
    if args.metrics:
        evaluation["metrics"] = [m.strip() for m in args.metrics.split(",") if m.strip()]
    if args.n_terms is not None:
        evaluation["n_terms"] = args.n_terms
    if args.window is not None:
        evaluation["window"] = args.window
    if evaluation:
        obj["evaluation"] = evaluation
    return obj


def _build_config(args: argparse.Namespace) -> PipelineConfig:
    flag_obj = _flags_to_dict(args)
    if args.config:
        import os

        from .pipeline import tomllib

        with open(args.config, "rb") as fh:
            file_obj = tomllib.load(fh)
        base_dir = os.path.dirname(os.path.abspath(args.config))
        merged = dict(flag_obj)
        for key, value in file_obj.items():
            if isinstance(value, dict) and isinstance(merged.get(key), dict):
                merged[key] = {**merged[key], **value}
            else:
                merged[key] = value
        return config_from_dict(merged, base_dir=base_dir)
    return config_from_dict(flag_obj)


def _write_or_print(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        print(text)


def cmd_run(args: argparse.Namespace) -> int:
    config = _build_config(args)
    report = run_pipeline(config)
    _write_or_print(report.to_json(), args.out)
    if args.topics_md:
        with open(args.topics_md, "w", encoding="utf-8") as fh:
            fh.write(report.topics.to_markdown())
    return 0


def cmd_grid(args: argparse.Namespace) -> int:
    configs = []
    for path in args.configs:
        configs.extend(load_grid_configs(path))
    rows = grid_run(configs, args.out)
    failures = sum(1 for row in rows if row["error"])
    for row in rows:
        status = f"error: {row['error']}" if row["error"] else f"cv={row['cv'] or 'n/a'}"
        print(
            f"{row['embedding']} | {row['reducer']} | {row['clusterer']} | "
            f"k={row['n_topics'] or '-'} | {status}"
        )
    return 2 if failures else 0


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _build_config(args)
    k_values = [int(k) for k in args.k_values.split(",") if k.strip()]
    rows = topic_sweep(config, args.model, k_values, args.out, out_svg=args.svg)
    failures = sum(1 for row in rows if row["error"])
    for row in rows:
        print(f"k={row['k']}: {row['error'] or 'cv=' + row['cv']}")
    return 2 if failures else 0


def cmd_export_topics(args: argparse.Namespace) -> int:
    if args.report:
        with open(args.report, "r", encoding="utf-8") as fh:
            report = RunReport.from_json_dict(json.load(fh))
        topic_set = report.topics
    else:
        topic_set = run_pipeline(_build_config(args)).topics
    if args.json_out:
        _write_or_print(topic_set.to_json(), args.json_out)
    if args.md or not args.json_out:
        _write_or_print(topic_set.to_markdown(), args.md)
    return 0


def cmd_score(args: argparse.Namespace) -> int:
    with open(args.topics, "r", encoding="utf-8") as fh:
        topic_set = TopicSet.from_json_dict(json.load(fh))
    corp = corpus_mod.Corpus.from_jsonl(args.corpus)
    stopwords = frozenset()
    if args.stopwords:
        stopwords = corpus_mod.load_stopwords(args.stopwords)
    tok_config = corpus_mod.TokenizerConfig(stopwords=stopwords)
    corpus_tokens = [corpus_mod.doc_tokens(d, tok_config) for d in corp]
    metrics = [m.strip() for m in (args.metrics or "cv,umass").split(",") if m.strip()]
    out: dict = {}
    for metric in metrics:
        if metric == "cv":
            out["cv"] = coherence_mod.cv(
                topic_set, corpus_tokens, window=args.window or 110
            ).to_json_dict()
        elif metric == "umass":
            stats = coherence_mod.cooccurrence_stats(
                corpus_tokens,
                {t for topic in topic_set for t in topic.term_list},
                coherence_mod.WHOLE_DOC,
            )
            out["umass"] = coherence_mod.umass(topic_set, stats).to_json_dict()
        else:
            raise ConfigError(f"unknown metric {metric!r}")
    _write_or_print(json.dumps(out, indent=2), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topicpipe",
        description="Topic extraction pipeline with baselines and coherence evaluation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one pipeline configuration")
    _add_run_flags(p_run)
    p_run.add_argument("--out", help="report JSON output path (default stdout)")
    p_run.add_argument("--topics-md", help="also write the topic table as Markdown")
    p_run.set_defaults(func=cmd_run)

    p_grid = sub.add_parser("grid", help="run a grid of configurations into a CSV")
    p_grid.add_argument("configs", nargs="+", help="TOML config files (each may hold [[run]] tables)")
    p_grid.add_argument("--out", required=True, help="grid CSV output path")
    p_grid.set_defaults(func=cmd_grid)

    p_sweep = sub.add_parser("sweep", help="sweep the topic count and score cv per k")
    _add_run_flags(p_sweep)
    p_sweep.add_argument("--model", choices=["lda", "pipeline"], default="lda")
    p_sweep.add_argument("--k-values", required=True, help="comma list, e.g. 5,10,20")
    p_sweep.add_argument("--out", required=True, help="sweep CSV output path")
    p_sweep.add_argument("--svg", help="also write a line plot SVG")
    p_sweep.set_defaults(func=cmd_sweep)

    p_export = sub.add_parser("export-topics", help="export a TopicSet as Markdown/JSON")
    _add_run_flags(p_export)
    p_export.add_argument("--report", help="existing run-report JSON to export from")
    p_export.add_argument("--md", help="Markdown output path (default stdout)")
    p_export.add_argument("--json-out", help="JSON output path")
    p_export.set_defaults(func=cmd_export_topics)

    p_score = sub.add_parser("score", help="score an existing TopicSet against a corpus")
    p_score.add_argument("--topics", required=True, help="TopicSet JSON path")
    p_score.add_argument("--corpus", required=True, help="corpus JSONL path")
    p_score.add_argument("--stopwords")
    p_score.add_argument("--metrics", default="cv,umass")
    p_score.add_argument("--window", type=int, default=None)
    p_score.add_argument("--out", help="output path (default stdout)")
    p_score.set_defaults(func=cmd_score)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except TopicPipeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
