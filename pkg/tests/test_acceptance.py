"""Acceptance suite: one test per primary criterion, stated tolerances.

Each criterion prints a [PASS]/[FAIL] line (visible with ``pytest -s`` or
``-v`` plus ``-rA``). Everything here runs on hash embeddings only; no
pretrained encoder is involved.
"""

import json
import time
from contextlib import contextmanager

import numpy as np
import pytest

from synthdata import make_blobs, make_planted_corpus, make_random_corpus, make_theme_corpus
from oracles import (
    best_permutation_purity,
    cv_oracle,
    kpca_oracle,
    purity,
    umass_oracle,
)
from topicpipe.baselines import lda_fit, lda_topics
from topicpipe.cluster import kmeans
from topicpipe.coherence import WHOLE_DOC, cooccurrence_stats, cv, umass
from topicpipe.corpus import (
    TokenizerConfig,
    build_vocabulary,
    doc_term_counts,
    doc_tokens,
)
from topicpipe.dimred import (
    KernelConfig,
    center_kernel,
    compute_kernel,
    kpca_fit_transform,
    pca_fit_transform,
    sym_eigs_topk,
)
from topicpipe.embeddings import EmbeddingMatrix, read_embeddings, write_embeddings
from topicpipe.pipeline import GRID_CSV_HEADER, config_from_dict, grid_run, run_pipeline, topic_sweep
from topicpipe.topics import Topic, TopicSet


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"[FAIL] {name}")
        raise
    print(f"[PASS] {name}")


@pytest.fixture(scope="module")
def theme_setup(tmp_path_factory):
    """The 2,000-doc, 8-theme corpus shared by the end-to-end criteria."""
    tc = make_theme_corpus(seed=5)
    root = tmp_path_factory.mktemp("acceptance")
    corpus_path = root / "theme_corpus.jsonl"
    with open(corpus_path, "w", encoding="utf-8") as fh:
        for doc in tc.corpus:
            fh.write(json.dumps({"id": doc.id, "text": doc.text}) + "\n")

    def config(n_topics):
        return config_from_dict(
            {
                "corpus": str(corpus_path),
                "n_topics": n_topics,
                "seed": 0,
                "embedding": {"source": "hash", "dim": 256, "seed": 0},
                "reducer": {"kind": "kpca", "n_components": 8, "gamma": 15.0},
                "clusterer": {"kind": "kmeans"},
                "evaluation": {"metrics": ["cv", "umass"], "n_terms": 20},
            }
        )

    return {"tc": tc, "root": root, "config": config}


def test_kpca_equals_pca_on_linear_kernel():
    rng = np.random.default_rng(42)
    x = rng.standard_normal((50, 10))
    start = time.perf_counter()
    pca = pca_fit_transform(x, k=5).data
    kpca = kpca_fit_transform(x, k=5, cfg=KernelConfig(kind="linear")).data
    elapsed = time.perf_counter() - start
    with criterion("KPCA(linear) == PCA per component, |corr| >= 1 - 1e-8, < 1 s"):
        for j in range(5):
            corr = abs(np.corrcoef(pca[:, j], kpca[:, j])[0, 1])
            assert corr >= 1 - 1e-8, f"component {j}: |corr| = {corr}"
        assert elapsed < 1.0, f"took {elapsed:.3f} s"


def test_centered_kernel_eigenpair_residuals():
    rng = np.random.default_rng(7)
    x = 0.15 * rng.standard_normal((100, 16))
    start = time.perf_counter()
    kernel = compute_kernel(x, KernelConfig(kind="rbf", gamma=15.0))
    centered = center_kernel(kernel)
    eig = sym_eigs_topk(centered, k=5)
    elapsed = time.perf_counter() - start
    with criterion("eigenproblem residual <= 1e-8 * ||K'||_F for all 5 pairs, < 1 s"):
        residual = np.linalg.norm(
            centered @ eig.eigenvectors - eig.eigenvectors * eig.eigenvalues, axis=0
        )
        bound = 1e-8 * np.linalg.norm(centered, "fro")
        assert np.all(residual <= bound), f"max residual {residual.max():.3e} > {bound:.3e}"
        assert elapsed < 1.0, f"took {elapsed:.3f} s"


def test_kpca_matches_independent_brute_force_oracle():
    x = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.5, 1.2]])
    with criterion("4-point KPCA projections match brute-force oracle within 1e-9"):
        mine = kpca_fit_transform(x, k=2, cfg=KernelConfig(kind="rbf", gamma=0.5)).data
        reference = kpca_oracle(x, k=2, gamma=0.5)
        assert np.allclose(mine, reference, atol=1e-9)


def test_kmeans_inertia_monotone_and_blob_recovery():
    start = time.perf_counter()
    rng = np.random.default_rng(0)
    small = rng.standard_normal((50, 4))
    with criterion("inertia non-increasing every Lloyd iteration over 1,000 seeded runs"):
        for seed in range(1000):
            assignment, _ = kmeans(small, k=4, n_init=1, max_iter=50, seed=seed)
            history = np.array(assignment.inertia_history)
            assert np.all(history[1:] <= history[:-1] * (1 + 1e-10) + 1e-12), (
                f"seed {seed}: {history}"
            )
    points, truth = make_blobs(n_blobs=8, per_blob=25, sigma=0.1, dim=5, seed=0)
    with criterion("8-blob purity >= 0.99 in >= 95% of 100 seeds (Table-2 defaults), < 10 s total"):
        hits = 0
        for seed in range(100):
            assignment, _ = kmeans(points, k=8, n_init=10, max_iter=300, seed=seed)
            hits += purity(assignment.labels, truth) >= 0.99
        elapsed = time.perf_counter() - start
        assert hits >= 95, f"only {hits}/100 seeds reached 0.99 purity"
        assert elapsed < 10.0, f"took {elapsed:.3f} s"


def test_coherence_equals_brute_force_oracles():
    corpus = make_random_corpus(seed=3)
    config = TokenizerConfig()
    docs = [doc_tokens(d, config) for d in corpus]
    term_lists = [
        ["word00", "word01", "word02", "word05", "word09"],
        ["word03", "word07", "word11", "word15", "word20"],
    ]
    topics = TopicSet(
        topics=tuple(
            Topic(topic_id=i, terms=tuple((t, 1.0) for t in terms))
            for i, terms in enumerate(term_lists)
        ),
        n_terms=5,
    )
    with criterion("cv equals window-enumeration oracle within 1e-12 (200 docs, T=5)"):
        report = cv(topics, docs, window=110)
        reference = cv_oracle(term_lists, docs, window=110, epsilon=1e-12)
        assert np.allclose(report.per_topic, reference, atol=1e-12)
    with criterion("umass equals direct pair-count oracle within 1e-12 (200 docs, T=5)"):
        stats = cooccurrence_stats(docs, {t for lst in term_lists for t in lst}, WHOLE_DOC)
        report = umass(topics, stats)
        reference = umass_oracle(term_lists, docs)
        assert np.allclose(report.per_topic, reference, atol=1e-12)


def test_lda_recovers_planted_topics():
    planted = make_planted_corpus(n_docs=500, n_topics=4, words_per_topic=10, seed=11)
    config = TokenizerConfig()
    vocab = build_vocabulary(planted.corpus, config, ngram_range=(1, 1), min_count=1)
    counts = doc_term_counts(planted.corpus, vocab, config)
    start = time.perf_counter()
    model = lda_fit(counts, k=4, iters=1000, seed=1)
    elapsed = time.perf_counter() - start
    with criterion("LDA best-permutation purity >= 0.9 after 1000 Gibbs sweeps, < 60 s"):
        doc_labels = model.doc_topic.argmax(axis=1)
        score = best_permutation_purity(doc_labels, planted.labels, k=4)
        assert score >= 0.9, f"purity {score:.3f}"
        assert elapsed < 60.0, f"took {elapsed:.1f} s"


@pytest.fixture(scope="module")
def theme_reports(theme_setup):
    start = time.perf_counter()
    report_k8 = run_pipeline(theme_setup["config"](8))
    report_k4 = run_pipeline(theme_setup["config"](4))
    tc = theme_setup["tc"]
    config = TokenizerConfig()
    vocab = build_vocabulary(tc.corpus, config, ngram_range=(1, 3), min_count=2)
    counts = doc_term_counts(tc.corpus, vocab, config)
    lda_model = lda_fit(counts, k=8, iters=1000, seed=0)
    topics = lda_topics(lda_model, vocab, n_terms=20)
    docs = [doc_tokens(d, config) for d in tc.corpus]
    lda_cv = cv(topics, docs)
    elapsed = time.perf_counter() - start
    return {
        "k8": report_k8,
        "k4": report_k4,
        "lda_cv": lda_cv.aggregate,
        "elapsed": elapsed,
    }


def test_end_to_end_ordering_pipeline_beats_lda(theme_setup, theme_reports):
    with criterion(
        "pipeline(kpca+kmeans, k=8) cv > LDA(K=8) cv and purity >= 0.8 "
        "on the 8-theme corpus, < 2 min"
    ):
        report = theme_reports["k8"]
        assert report.config["embedding"]["source"] == "hash"
        pipeline_cv = report.coherence["cv"].aggregate
        assert pipeline_cv > theme_reports["lda_cv"], (
            f"pipeline cv {pipeline_cv:.4f} not above lda cv {theme_reports['lda_cv']:.4f}"
        )
        labels = np.array(report.cluster_labels)
        score = purity(labels, theme_setup["tc"].labels)
        assert score >= 0.8, f"purity {score:.3f}"
        assert theme_reports["elapsed"] < 120.0, f"took {theme_reports['elapsed']:.1f} s"


def test_constrained_topic_count_degrades_cv(theme_reports):
    with criterion("forcing k=4 below the 8 planted themes: cv(k=4) <= cv(k=8) + 1e-9"):
        cv_k4 = theme_reports["k4"].coherence["cv"].aggregate
        cv_k8 = theme_reports["k8"].coherence["cv"].aggregate
        assert cv_k4 <= cv_k8 + 1e-9, f"cv(k=4) = {cv_k4:.4f} > cv(k=8) = {cv_k8:.4f}"


def test_topic_sweep_peaks_at_planted_count(tmp_path):
    planted = make_planted_corpus(n_docs=500, n_topics=4, words_per_topic=10, seed=11)
    corpus_path = tmp_path / "planted.jsonl"
    with open(corpus_path, "w", encoding="utf-8") as fh:
        for doc in planted.corpus:
            fh.write(json.dumps({"id": doc.id, "text": doc.text}) + "\n")
    base = config_from_dict(
        {
            "corpus": str(corpus_path),
            "corpus_opts": {"ngram_range": [1, 1], "min_count": 1},
            "evaluation": {"metrics": ["cv"], "n_terms": 10},
            "lda": {"iters": 300},
            "seed": 0,
        }
    )
    out_csv = tmp_path / "sweep.csv"
    out_svg = tmp_path / "sweep.svg"
    rows = topic_sweep(base, "lda", [2, 4, 8, 16], out_csv, out_svg=out_svg)
    with criterion("topic sweep k in {2,4,8,16}: CSV + SVG emitted, cv peaks at 4 +/- one step"):
        assert out_csv.exists() and out_svg.exists()
        assert [row["k"] for row in rows] == [2, 4, 8, 16]
        assert all(row["error"] == "" for row in rows)
        svg = out_svg.read_text(encoding="utf-8")
        assert svg.count("<polyline") == 1
        scores = {row["k"]: float(row["cv"]) for row in rows}
        peak = max(scores, key=scores.get)
        assert peak in (2, 4, 8), f"peak at k={peak}, scores {scores}"


def test_format_contracts(tmp_path, theme_setup):
    with criterion("EMB1 round-trip is bit-exact"):
        rng = np.random.default_rng(19)
        data = rng.standard_normal((7, 5)).astype(np.float32).astype(np.float64)
        matrix = EmbeddingMatrix(data=data, doc_ids=tuple(f"d{i}" for i in range(7)))
        path = tmp_path / "roundtrip.emb1"
        write_embeddings(matrix, path)
        back = read_embeddings(path)
        assert back.data.tobytes() == matrix.data.tobytes()
        assert back.doc_ids == matrix.doc_ids
    with criterion("grid CSV header is byte-exact"):
        out = tmp_path / "grid.csv"
        config = theme_setup["config"](8)
        small = config_from_dict(
            {
                "corpus": config.corpus_path,
                "n_topics": 8,
                "embedding": {"source": "hash", "dim": 64, "seed": 0},
                "reducer": {"kind": "pca", "n_components": 5},
                "evaluation": {"metrics": ["cv"], "n_terms": 10},
            }
        )
        grid_run([small], out)
        header = out.read_bytes().split(b"\n", 1)[0]
        assert header == b"embedding,reducer,clusterer,n_topics,cv,umass,wall_time_s,error"
        assert ",".join(GRID_CSV_HEADER).encode() == header
