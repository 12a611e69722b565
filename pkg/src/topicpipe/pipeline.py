"""Experiment harness: single pipeline runs, grid comparisons, topic sweeps.

A pipeline run executes embed -> reduce -> cluster -> class-TF-IDF ->
top terms -> coherence and returns a fully populated, JSON-serializable
report. Configuration is a TOML file with [corpus], [embedding],
[reducer], [clusterer] and [evaluation] sections whose defaults mirror the
reference parameter tables (kpca: n_components 5, rbf, gamma 15,
random_state 42; svd: randomized, random_state 0; kmeans: k-means++,
n_init 10, max_iter 300, 8 clusters; agglomerative: Ward, 2 clusters;
dbscan: eps 0.30, min_samples 9).

Topic-count resolution: an explicit ``n_topics`` is passed as k to the
partitional clusterers; otherwise the clusterer's own default applies; the
string ``"unspecified"`` requests the free regime, mapping to density
clustering as-is and to a sqrt(N/2) heuristic k for the partitional
methods. The mode used is recorded in the report.
"""

from __future__ import annotations

import csv
import json
import math
import sys
import time
from dataclasses import dataclass, field

from . import baselines, cluster, coherence, corpus as corpus_mod, dimred, embeddings, topics as topics_mod
from .errors import ConfigError, StageError, TopicPipeError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

GRID_CSV_HEADER = ["embedding", "reducer", "clusterer", "n_topics", "cv", "umass", "wall_time_s", "error"]

_REDUCER_DEFAULTS = {
    "pca": {"n_components": 5},
    "kpca": {"n_components": 5, "kernel": "rbf", "gamma": 15.0, "random_state": 42},
    "svd": {"n_components": 5, "algorithm": "randomized", "random_state": 0},
}

_CLUSTERER_DEFAULTS = {
    "kmeans": {"n_clusters": 8, "n_init": 10, "max_iter": 300, "init": "k-means++"},
    "agglomerative": {"n_clusters": 2, "linkage": "ward", "metric": "euclidean"},
    "dbscan": {"eps": 0.30, "min_samples": 9, "metric": "euclidean"},
}

_CORPUS_DEFAULTS = {
    "stopwords": None,
    "ngram_range": [1, 3],
    "min_count": 2,
    "lowercase": True,
    "token_pattern": corpus_mod.DEFAULT_TOKEN_PATTERN,
}

_EVALUATION_DEFAULTS = {
    "metrics": ["cv", "umass"],
    "n_terms": 20,
    "window": coherence.DEFAULT_CV_WINDOW,
    "epsilon": coherence.DEFAULT_CV_EPSILON,
}

_LDA_DEFAULTS = {"alpha": 0.1, "beta": 0.01, "iters": 1000}


def _merged(defaults: dict, overrides: dict, section: str, extra_ok: tuple = ()) -> dict:
    out = dict(defaults)
    for key, value in overrides.items():
        if key not in defaults and key not in extra_ok:
            raise ConfigError(f"unknown key {key!r} in [{section}]")
        out[key] = value
    return out


@dataclass
class PipelineConfig:
    """One experiment cell: corpus, embedding source, reducer, clusterer,
    evaluation settings and the run seed."""

    corpus_path: str
    embedding: dict = field(default_factory=lambda: {"source": "hash", "dim": 256, "seed": 0})
    reducer: dict = field(default_factory=lambda: {"kind": "kpca", **_REDUCER_DEFAULTS["kpca"]})
    clusterer: dict = field(default_factory=lambda: {"kind": "kmeans", **_CLUSTERER_DEFAULTS["kmeans"]})
    corpus_opts: dict = field(default_factory=lambda: dict(_CORPUS_DEFAULTS))
    evaluation: dict = field(default_factory=lambda: dict(_EVALUATION_DEFAULTS))
    lda: dict = field(default_factory=lambda: dict(_LDA_DEFAULTS))
    n_topics: int | str | None = None
    seed: int = 0

    def validate(self) -> None:
        if not self.corpus_path:
            raise ConfigError("corpus path is required")
        source = self.embedding.get("source")
        if source == "hash":
            if int(self.embedding.get("dim", 0)) < 1:
                raise ConfigError("hash embedding dim must be >= 1")
        elif source == "file":
            if not self.embedding.get("path"):
                raise ConfigError("embedding source 'file' requires a path")
        else:
            raise ConfigError(f"embedding source must be 'hash' or 'file', got {source!r}")
        if self.reducer.get("kind") not in _REDUCER_DEFAULTS:
            raise ConfigError(f"unknown reducer {self.reducer.get('kind')!r}")
        if self.clusterer.get("kind") not in _CLUSTERER_DEFAULTS:
            raise ConfigError(f"unknown clusterer {self.clusterer.get('kind')!r}")
        metrics = self.evaluation.get("metrics", [])
        bad = [m for m in metrics if m not in ("cv", "umass")]
        if bad:
            raise ConfigError(f"unknown coherence metric(s): {bad}")
        if int(self.evaluation.get("n_terms", 0)) < 1:
            raise ConfigError("n_terms must be >= 1")
        if self.n_topics is not None and self.n_topics != "unspecified":
            try:
                n_topics = int(self.n_topics)
            except (TypeError, ValueError):
                raise ConfigError(
                    f"n_topics must be an integer or 'unspecified', got {self.n_topics!r}"
                ) from None
            if n_topics < 1:
                raise ConfigError(f"n_topics must be >= 1, got {self.n_topics}")
        lo, hi = self.corpus_opts.get("ngram_range", (1, 3))
        if not 1 <= int(lo) <= int(hi) <= 3:
            raise ConfigError(f"ngram_range must satisfy 1 <= min <= max <= 3, got ({lo}, {hi})")

    def to_json_dict(self) -> dict:
        return json.loads(json.dumps({
            "corpus": self.corpus_path,
            "embedding": self.embedding,
            "reducer": self.reducer,
            "clusterer": self.clusterer,
            "corpus_opts": self.corpus_opts,
            "evaluation": self.evaluation,
            "lda": self.lda,
            "n_topics": self.n_topics,
            "seed": self.seed,
        }))

    def embedding_label(self) -> str:
        if self.embedding["source"] == "hash":
            return f"hash(dim={self.embedding['dim']},seed={self.embedding.get('seed', self.seed)})"
        return f"file:{self.embedding['path']}"

    def reducer_label(self) -> str:
        return self.reducer["kind"]

    def clusterer_label(self) -> str:
        return self.clusterer["kind"]


def config_from_dict(obj: dict, base_dir: str | None = None) -> PipelineConfig:
    """Build a validated config from a parsed TOML table."""
    import os

    known_top = {"corpus", "n_topics", "seed", "corpus_opts", "embedding", "reducer", "clusterer", "evaluation", "lda"}
    unknown = set(obj) - known_top
    if unknown:
        raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
    corpus_path = obj.get("corpus")
    if not isinstance(corpus_path, str) or not corpus_path:
        raise ConfigError("config must set 'corpus' to the corpus JSONL path")
    if base_dir and not os.path.isabs(corpus_path):
        corpus_path = os.path.join(base_dir, corpus_path)

    corpus_opts = _merged(_CORPUS_DEFAULTS, obj.get("corpus_opts", {}), "corpus_opts")
    if corpus_opts["stopwords"] and base_dir and not os.path.isabs(corpus_opts["stopwords"]):
        corpus_opts["stopwords"] = os.path.join(base_dir, corpus_opts["stopwords"])

    emb = dict(obj.get("embedding", {}))
    source = emb.pop("source", "hash")
    if source == "hash":
        embedding = _merged({"dim": 256, "seed": obj.get("seed", 0)}, emb, "embedding")
    else:
        embedding = _merged({"path": None}, emb, "embedding")
        if embedding["path"] and base_dir and not os.path.isabs(embedding["path"]):
            embedding["path"] = os.path.join(base_dir, embedding["path"])
    embedding["source"] = source

    red = dict(obj.get("reducer", {}))
    red_kind = red.pop("kind", "kpca")
    if red_kind not in _REDUCER_DEFAULTS:
        raise ConfigError(f"unknown reducer {red_kind!r}")
    reducer = _merged(_REDUCER_DEFAULTS[red_kind], red, "reducer")
    reducer["kind"] = red_kind

    clu = dict(obj.get("clusterer", {}))
    clu_kind = clu.pop("kind", "kmeans")
    if clu_kind not in _CLUSTERER_DEFAULTS:
        raise ConfigError(f"unknown clusterer {clu_kind!r}")
    clusterer = _merged(_CLUSTERER_DEFAULTS[clu_kind], clu, "clusterer")
    clusterer["kind"] = clu_kind

    evaluation = _merged(_EVALUATION_DEFAULTS, obj.get("evaluation", {}), "evaluation")
    # Extra LDA keys (chunksize, passes, ...) are accepted and echoed as
    # metadata; only the sampler parameters drive behavior.
    lda = _merged(_LDA_DEFAULTS, obj.get("lda", {}), "lda", extra_ok=("chunksize", "passes", "seed"))

    config = PipelineConfig(
        corpus_path=corpus_path,
        embedding=embedding,
        reducer=reducer,
        clusterer=clusterer,
        corpus_opts=corpus_opts,
        evaluation=evaluation,
        lda=lda,
        n_topics=obj.get("n_topics"),
        seed=int(obj.get("seed", 0)),
    )
    config.validate()
    return config


def load_config(path) -> PipelineConfig:
    """Parse a single-run TOML config file."""
    import os

    with open(path, "rb") as fh:
        obj = tomllib.load(fh)
    return config_from_dict(obj, base_dir=os.path.dirname(os.path.abspath(path)))


def load_grid_configs(path) -> list[PipelineConfig]:
    """Parse a grid TOML file: shared top-level settings plus one [[run]]
    table per cell, each overriding the shared settings."""
    import os

    with open(path, "rb") as fh:
        obj = tomllib.load(fh)
    base_dir = os.path.dirname(os.path.abspath(path))
    runs = obj.pop("run", None)
    if runs is None:
        return [config_from_dict(obj, base_dir=base_dir)]
    configs = []
    for entry in runs:
        merged = dict(obj)
        for key, value in entry.items():
            if isinstance(value, dict) and isinstance(merged.get(key), dict):
                merged[key] = {**merged[key], **value}
            else:
                merged[key] = value
        configs.append(config_from_dict(merged, base_dir=base_dir))
    return configs


@dataclass(frozen=True)
class RunReport:
    """Everything one pipeline run produced, JSON round-trippable."""

    config: dict
    topics: topics_mod.TopicSet
    coherence: dict
    timings: dict
    n_topics_produced: int
    topic_count_mode: str
    resolved_k: int | None
    cluster_labels: tuple[int, ...]

    def to_json_dict(self) -> dict:
        return {
            "config": self.config,
            "topics": self.topics.to_json_dict(),
            "coherence": {m: r.to_json_dict() for m, r in self.coherence.items()},
            "timings": dict(self.timings),
            "n_topics_produced": self.n_topics_produced,
            "topic_count_mode": self.topic_count_mode,
            "resolved_k": self.resolved_k,
            "cluster_labels": list(self.cluster_labels),
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "RunReport":
        return cls(
            config=obj["config"],
            topics=topics_mod.TopicSet.from_json_dict(obj["topics"]),
            coherence={
                m: coherence.CoherenceReport.from_json_dict(r)
                for m, r in obj["coherence"].items()
            },
            timings=dict(obj["timings"]),
            n_topics_produced=int(obj["n_topics_produced"]),
            topic_count_mode=str(obj["topic_count_mode"]),
            resolved_k=obj["resolved_k"],
            cluster_labels=tuple(int(x) for x in obj["cluster_labels"]),
        )

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_json_dict(), indent=indent)


def _tokenizer_config(opts: dict) -> corpus_mod.TokenizerConfig:
    stopwords = frozenset()
    if opts.get("stopwords"):
        stopwords = corpus_mod.load_stopwords(opts["stopwords"])
    return corpus_mod.TokenizerConfig(
        lowercase=bool(opts.get("lowercase", True)),
        stopwords=stopwords,
        token_pattern=opts.get("token_pattern", corpus_mod.DEFAULT_TOKEN_PATTERN),
    )


def _resolve_k(config: PipelineConfig, n_docs: int) -> tuple[int | None, str]:
    kind = config.clusterer["kind"]
    if config.n_topics is None:
        if kind == "dbscan":
            return None, "density"
        return int(config.clusterer["n_clusters"]), "clusterer_default"
    if config.n_topics == "unspecified":
        if kind == "dbscan":
            return None, "density"
        return max(1, round(math.sqrt(n_docs / 2))), "heuristic_sqrt_n_over_2"
    if kind == "dbscan":
        return None, "density"
    return int(config.n_topics), "n_topics"


def _stage(timings: dict, name: str):
    class _Timer:
        def __enter__(self):
            self.start = time.perf_counter()
            return self

        def __exit__(self, exc_type, exc, tb):
            timings[name] = time.perf_counter() - self.start
            if exc is not None and not isinstance(exc, (ConfigError, StageError)):
                raise StageError(name, exc) from exc
            return False

    return _Timer()


def run_pipeline(config: PipelineConfig) -> RunReport:
    """Execute one full pipeline run and return its report.

    Raises :class:`ConfigError` for invalid configuration or missing inputs
    before any computation, and :class:`StageError` tagged with the stage
    name for failures inside a stage.
    """
    import os

    config.validate()
    if not os.path.exists(config.corpus_path):
        raise ConfigError(f"corpus file not found: {config.corpus_path}")
    if config.embedding["source"] == "file" and not os.path.exists(config.embedding["path"]):
        raise ConfigError(f"embedding file not found: {config.embedding['path']}")
    stopwords_path = config.corpus_opts.get("stopwords")
    if stopwords_path and not os.path.exists(stopwords_path):
        raise ConfigError(f"stopwords file not found: {stopwords_path}")

    timings: dict[str, float] = {}
    with _stage(timings, "load"):
        corp = corpus_mod.Corpus.from_jsonl(config.corpus_path)
        tok_config = _tokenizer_config(config.corpus_opts)
        if len(corp) == 0:
            raise ConfigError(f"corpus is empty: {config.corpus_path}")

    with _stage(timings, "embed"):
        if config.embedding["source"] == "file":
            emb = embeddings.read_embeddings(config.embedding["path"])
            if emb.doc_ids != corp.doc_ids:
                raise ConfigError(
                    "embedding doc ids do not match the corpus (order and ids must agree)"
                )
        else:
            emb = embeddings.hash_projection_embed(
                corp,
                tok_config,
                dim=int(config.embedding["dim"]),
                seed=int(config.embedding.get("seed", config.seed)),
            )

    with _stage(timings, "reduce"):
        red_cfg = config.reducer
        k_components = int(red_cfg["n_components"])
        if red_cfg["kind"] == "pca":
            reduced = dimred.pca_fit_transform(emb, k_components)
        elif red_cfg["kind"] == "kpca":
            kernel_cfg = dimred.KernelConfig(
                kind=red_cfg.get("kernel", "rbf"), gamma=float(red_cfg.get("gamma", 15.0))
            )
            reduced = dimred.kpca_fit_transform(emb, k_components, kernel_cfg)
        else:
            reduced = dimred.truncated_svd(
                emb.data,
                k_components,
                algorithm=red_cfg.get("algorithm", "randomized"),
                random_state=int(red_cfg.get("random_state", 0)),
            )

    resolved_k, mode = _resolve_k(config, len(corp))
    with _stage(timings, "cluster"):
        clu = config.clusterer
        if clu["kind"] == "kmeans":
            assignment, _ = cluster.kmeans(
                reduced,
                resolved_k,
                n_init=int(clu.get("n_init", 10)),
                max_iter=int(clu.get("max_iter", 300)),
                seed=config.seed,
            )
        elif clu["kind"] == "agglomerative":
            assignment = cluster.agglomerative(reduced, resolved_k)
        else:
            assignment = cluster.dbscan(
                reduced, eps=float(clu.get("eps", 0.30)), min_samples=int(clu.get("min_samples", 9))
            )

    with _stage(timings, "topics"):
        vocab = corpus_mod.build_vocabulary(
            corp,
            tok_config,
            ngram_range=tuple(int(x) for x in config.corpus_opts["ngram_range"]),
            min_count=int(config.corpus_opts["min_count"]),
        )
        counts = corpus_mod.doc_term_counts(corp, vocab, tok_config)
        weights, class_ids = topics_mod.class_tfidf(counts, assignment)
        topic_set = topics_mod.top_terms(
            weights, vocab, int(config.evaluation["n_terms"]), class_ids
        )

    reports: dict[str, coherence.CoherenceReport] = {}
    with _stage(timings, "coherence"):
        corpus_tokens = [corpus_mod.doc_tokens(d, tok_config) for d in corp]
        for metric in config.evaluation["metrics"]:
            if metric == "cv":
                reports["cv"] = coherence.cv(
                    topic_set,
                    corpus_tokens,
                    window=int(config.evaluation["window"]),
                    epsilon=float(config.evaluation["epsilon"]),
                )
            else:
                stats = coherence.cooccurrence_stats(
                    corpus_tokens, {t for topic in topic_set for t in topic.term_list},
                    coherence.WHOLE_DOC,
                )
                reports["umass"] = coherence.umass(topic_set, stats)

    return RunReport(
        config=config.to_json_dict(),
        topics=topic_set,
        coherence=reports,
        timings=timings,
        n_topics_produced=len(topic_set),
        topic_count_mode=mode,
        resolved_k=resolved_k,
        cluster_labels=tuple(int(x) for x in assignment.labels),
    )


def grid_run(configs: list[PipelineConfig], out_path) -> list[dict]:
    """Run every config, writing one CSV row per cell; failures become rows
    with the error column filled and the grid keeps going."""
    if not configs:
        raise ValueError("grid_run needs at least one config")
    rows = []
    for config in configs:
        start = time.perf_counter()
        row = {
            "embedding": config.embedding_label(),
            "reducer": config.reducer_label(),
            "clusterer": config.clusterer_label(),
            "n_topics": "",
            "cv": "",
            "umass": "",
            "wall_time_s": "",
            "error": "",
        }
        try:
            report = run_pipeline(config)
            row["n_topics"] = "" if report.resolved_k is None else str(report.resolved_k)
            for metric in ("cv", "umass"):
                if metric in report.coherence:
                    row[metric] = repr(report.coherence[metric].aggregate)
        except TopicPipeError as exc:
            row["error"] = " ".join(str(exc).split())
        row["wall_time_s"] = f"{time.perf_counter() - start:.3f}"
        rows.append(row)
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=GRID_CSV_HEADER, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return rows


def topic_sweep(
    base: PipelineConfig,
    model: str,
    k_values: list[int],
    out_csv,
    out_svg=None,
) -> list[dict]:
    """Refit at each topic count and record the cv score per k.

    ``model`` selects what gets refit: ``"lda"`` refits the LDA baseline on
    the corpus counts, ``"pipeline"`` reruns the full pipeline with
    n_topics = k. Per-k failures are recorded and the sweep continues.
    """
    if model not in ("lda", "pipeline"):
        raise ValueError(f"model must be 'lda' or 'pipeline', got {model!r}")
    if not k_values or any(k < 1 for k in k_values):
        raise ValueError("k_values must be non-empty with every k >= 1")
    base.validate()
    rows = []
    shared = None
    if model == "lda":
        corp = corpus_mod.Corpus.from_jsonl(base.corpus_path)
        tok_config = _tokenizer_config(base.corpus_opts)
        vocab = corpus_mod.build_vocabulary(
            corp,
            tok_config,
            ngram_range=tuple(int(x) for x in base.corpus_opts["ngram_range"]),
            min_count=int(base.corpus_opts["min_count"]),
        )
        counts = corpus_mod.doc_term_counts(corp, vocab, tok_config)
        corpus_tokens = [corpus_mod.doc_tokens(d, tok_config) for d in corp]
        shared = (vocab, counts, corpus_tokens)
    for k in k_values:
        row = {"k": k, "cv": "", "error": ""}
        try:
            if model == "lda":
                vocab, counts, corpus_tokens = shared
                lda_model = baselines.lda_fit(
                    counts,
                    k,
                    alpha=float(base.lda["alpha"]),
                    beta=float(base.lda["beta"]),
                    iters=int(base.lda["iters"]),
                    seed=int(base.lda.get("seed", base.seed)),
                )
                topic_set = baselines.lda_topics(lda_model, vocab, int(base.evaluation["n_terms"]))
                report = coherence.cv(
                    topic_set,
                    corpus_tokens,
                    window=int(base.evaluation["window"]),
                    epsilon=float(base.evaluation["epsilon"]),
                )
                row["cv"] = repr(report.aggregate)
            else:
                cell = PipelineConfig(
                    corpus_path=base.corpus_path,
                    embedding=dict(base.embedding),
                    reducer=dict(base.reducer),
                    clusterer=dict(base.clusterer),
                    corpus_opts=dict(base.corpus_opts),
                    evaluation={**base.evaluation, "metrics": ["cv"]},
                    lda=dict(base.lda),
                    n_topics=k,
                    seed=base.seed,
                )
                report = run_pipeline(cell)
                row["cv"] = repr(report.coherence["cv"].aggregate)
        except TopicPipeError as exc:
            row["error"] = " ".join(str(exc).split())
        rows.append(row)
    with open(out_csv, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["k", "cv", "error"], lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    if out_svg is not None:
        points = [(row["k"], float(row["cv"])) for row in rows if row["cv"]]
        write_sweep_svg(out_svg, points)
    return rows


def write_sweep_svg(path, points: list[tuple[float, float]], width: int = 640, height: int = 400) -> None:
    """Minimal line chart: labeled axes and one polyline through the points."""
    left, right, top, bottom = 70, 20, 20, 50
    xs = [p[0] for p in points] or [0.0, 1.0]
    ys = [p[1] for p in points] or [0.0, 1.0]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 1.0, x_hi + 1.0
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    plot_w = width - left - right
    plot_h = height - top - bottom

    def sx(x: float) -> float:
        return left + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y: float) -> float:
        return top + (y_hi - y) / (y_hi - y_lo) * plot_h

    poly = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in points)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{left}" y1="{height - bottom}" x2="{width - right}" y2="{height - bottom}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{height - bottom}" stroke="black"/>',
        f'<text x="{left + plot_w / 2:.0f}" y="{height - 12}" text-anchor="middle" font-size="14">number of topics</text>',
        f'<text x="18" y="{top + plot_h / 2:.0f}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 18 {top + plot_h / 2:.0f})">coherence (cv)</text>',
    ]
    for x, _ in points:
        parts.append(
            f'<text x="{sx(x):.2f}" y="{height - bottom + 18}" text-anchor="middle" font-size="11">{x:g}</text>'
        )
    for value in (y_lo, y_hi):
        parts.append(
            f'<text x="{left - 6}" y="{sy(value) + 4:.2f}" text-anchor="end" font-size="11">{value:.3f}</text>'
        )
    if points:
        parts.append(f'<polyline points="{poly}" fill="none" stroke="steelblue" stroke-width="2"/>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
