"""Traditional topic models for comparison: LDA and LSI.

LDA runs collapsed Gibbs sampling over token-topic assignments with fixed
symmetric Dirichlet priors. All randomness is drawn outside the compiled
sweep from one seeded generator, so a seed pins the fitted model
bit-for-bit. Final distributions come from the smoothed counts:
topic_word(k, t) proportional to n(k, t) + beta and doc_topic(d, k)
proportional to n(d, k) + alpha.

LSI is a truncated SVD of the (typically TF-IDF weighted) document-term
matrix, sharing the SVD code path with the reduction stage, so its
document coordinates match ``truncated_svd`` exactly.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.special import gammaln

from .corpus import CountMatrix, Vocabulary
from .dimred import _svd_factors
from .embeddings import EmbeddingMatrix, read_embeddings, write_embeddings
from .topics import Topic, TopicSet


@dataclass(frozen=True)
class LdaModel:
    """Fitted LDA state: row-stochastic topic-word and doc-topic matrices."""

    topic_word: np.ndarray
    doc_topic: np.ndarray
    alpha: float
    beta: float
    iters: int
    seed: int
    ll_history: tuple[float, ...] = ()

    @property
    def n_topics(self) -> int:
        return self.topic_word.shape[0]


@dataclass(frozen=True)
class LsiModel:
    """Truncated-SVD topic space: document coordinates and term loadings."""

    doc_coords: np.ndarray
    term_loadings: np.ndarray
    singular_values: np.ndarray

    @property
    def n_topics(self) -> int:
        return self.doc_coords.shape[1]


@njit(cache=True)
def _gibbs_sweep(doc_of, word_of, z, n_dk, n_kt, n_k, alpha, beta, uniforms):
    n_topics, vocab_size = n_kt.shape
    vbeta = vocab_size * beta
    cumulative = np.empty(n_topics)
    for i in range(doc_of.shape[0]):
        d = doc_of[i]
        w = word_of[i]
        k = z[i]
        n_dk[d, k] -= 1
        n_kt[k, w] -= 1
        n_k[k] -= 1
        total = 0.0
        for t in range(n_topics):
            total += (n_kt[t, w] + beta) / (n_k[t] + vbeta) * (n_dk[d, t] + alpha)
            cumulative[t] = total
        r = uniforms[i] * total
        k = 0
        while cumulative[k] < r:
            k += 1
        z[i] = k
        n_dk[d, k] += 1
        n_kt[k, w] += 1
        n_k[k] += 1


def _expand_tokens(counts: CountMatrix) -> tuple[np.ndarray, np.ndarray]:
    m = counts.matrix
    docs, words = [], []
    for d in range(m.shape[0]):
        row = m.getrow(d)
        for w, c in zip(row.indices, row.data):
            docs.extend([d] * int(c))
            words.extend([int(w)] * int(c))
    return np.asarray(docs, dtype=np.int64), np.asarray(words, dtype=np.int64)


def _collapsed_log_likelihood(n_dk, n_kt, n_k, n_d, alpha, beta):
    n_topics, vocab_size = n_kt.shape
    n_docs = n_dk.shape[0]
    ll = n_topics * (gammaln(vocab_size * beta) - vocab_size * gammaln(beta))
    ll += gammaln(n_kt + beta).sum() - gammaln(n_k + vocab_size * beta).sum()
    ll += n_docs * (gammaln(n_topics * alpha) - n_topics * gammaln(alpha))
    ll += gammaln(n_dk + alpha).sum() - gammaln(n_d + n_topics * alpha).sum()
    return float(ll)


def lda_fit(
    counts: CountMatrix,
    k: int,
    alpha: float = 0.1,
    beta: float = 0.01,
    iters: int = 1000,
    seed: int = 0,
) -> LdaModel:
    """Fit LDA by collapsed Gibbs sampling.

    Runs ``iters`` full sweeps over all token-topic assignments. The total
    token count is checked after every sweep. Deterministic given the seed.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if counts.n_docs == 0 or counts.matrix.nnz == 0:
        raise ValueError("counts must be non-empty")
    vocab_size = counts.n_terms
    doc_of, word_of = _expand_tokens(counts)
    n_tokens = doc_of.shape[0]
    rng = np.random.default_rng(seed)
    z = rng.integers(0, k, n_tokens, dtype=np.int64)
    n_dk = np.zeros((counts.n_docs, k), dtype=np.int64)
    n_kt = np.zeros((k, vocab_size), dtype=np.int64)
    n_k = np.zeros(k, dtype=np.int64)
    np.add.at(n_dk, (doc_of, z), 1)
    np.add.at(n_kt, (z, word_of), 1)
    np.add.at(n_k, z, 1)
    n_d = n_dk.sum(axis=1)
    ll_history = []
    for _ in range(iters):
        uniforms = rng.random(n_tokens)
        _gibbs_sweep(doc_of, word_of, z, n_dk, n_kt, n_k, alpha, beta, uniforms)
        if n_k.sum() != n_tokens:
            raise AssertionError("token count not conserved across Gibbs sweep")
        ll_history.append(_collapsed_log_likelihood(n_dk, n_kt, n_k, n_d, alpha, beta))
    topic_word = n_kt + beta
    topic_word /= topic_word.sum(axis=1, keepdims=True)
    doc_topic = n_dk + alpha
    doc_topic /= doc_topic.sum(axis=1, keepdims=True)
    return LdaModel(
        topic_word=topic_word,
        doc_topic=doc_topic,
        alpha=alpha,
        beta=beta,
        iters=iters,
        seed=seed,
        ll_history=tuple(ll_history),
    )


def lda_topics(model: LdaModel, vocab: Vocabulary, n_terms: int = 20) -> TopicSet:
    """Top terms per LDA topic by word probability, lexicographic tie-break."""
    if n_terms < 1:
        raise ValueError(f"n_terms must be >= 1, got {n_terms}")
    topics = []
    for topic_id, row in enumerate(model.topic_word):
        ranked = sorted(zip(row, vocab.terms), key=lambda pt: (-pt[0], pt[1]))[:n_terms]
        topics.append(
            Topic(topic_id=topic_id, terms=tuple((t, float(p)) for p, t in ranked))
        )
    return TopicSet(topics=tuple(topics), n_terms=n_terms)


def lsi_fit(matrix, k: int) -> LsiModel:
    """Truncated SVD of a document-term matrix (sparse or dense)."""
    u, s, v = _svd_factors(matrix, k, algorithm="exact")
    return LsiModel(doc_coords=u * s, term_loadings=v, singular_values=s)


def lsi_topics(model: LsiModel, vocab: Vocabulary, n_terms: int = 20) -> TopicSet:
    """Top terms per LSI component by absolute loading."""
    if n_terms < 1:
        raise ValueError(f"n_terms must be >= 1, got {n_terms}")
    topics = []
    for topic_id in range(model.n_topics):
        loadings = model.term_loadings[:, topic_id]
        ranked = sorted(
            zip(loadings, vocab.terms), key=lambda lt: (-abs(lt[0]), lt[1])
        )[:n_terms]
        topics.append(
            Topic(topic_id=topic_id, terms=tuple((t, float(l)) for l, t in ranked))
        )
    return TopicSet(topics=tuple(topics), n_terms=n_terms)


def save_lda(model: LdaModel, directory) -> None:
    """Save an LDA model: JSON header plus EMB1 payloads for the matrices.

    EMB1 payloads are 32-bit floats, so reloaded distributions match to
    float32 precision.
    """
    os.makedirs(directory, exist_ok=True)
    header = {
        "kind": "lda",
        "n_topics": model.n_topics,
        "alpha": model.alpha,
        "beta": model.beta,
        "iters": model.iters,
        "seed": model.seed,
        "ll_history": list(model.ll_history),
    }
    with open(os.path.join(directory, "model.json"), "w", encoding="utf-8") as fh:
        json.dump(header, fh, indent=2)
    _write_matrix(model.topic_word, os.path.join(directory, "topic_word.emb1"))
    _write_matrix(model.doc_topic, os.path.join(directory, "doc_topic.emb1"))


def load_lda(directory) -> LdaModel:
    with open(os.path.join(directory, "model.json"), "r", encoding="utf-8") as fh:
        header = json.load(fh)
    if header.get("kind") != "lda":
        raise ValueError(f"{directory}: not an LDA model directory")
    return LdaModel(
        topic_word=read_embeddings(os.path.join(directory, "topic_word.emb1")).data,
        doc_topic=read_embeddings(os.path.join(directory, "doc_topic.emb1")).data,
        alpha=header["alpha"],
        beta=header["beta"],
        iters=header["iters"],
        seed=header["seed"],
        ll_history=tuple(header.get("ll_history", [])),
    )


def save_lsi(model: LsiModel, directory) -> None:
    """Save an LSI model: JSON header plus EMB1 payloads (float32)."""
    os.makedirs(directory, exist_ok=True)
    header = {"kind": "lsi", "singular_values": model.singular_values.tolist()}
    with open(os.path.join(directory, "model.json"), "w", encoding="utf-8") as fh:
        json.dump(header, fh, indent=2)
    _write_matrix(model.doc_coords, os.path.join(directory, "doc_coords.emb1"))
    _write_matrix(model.term_loadings, os.path.join(directory, "term_loadings.emb1"))


def load_lsi(directory) -> LsiModel:
    with open(os.path.join(directory, "model.json"), "r", encoding="utf-8") as fh:
        header = json.load(fh)
    if header.get("kind") != "lsi":
        raise ValueError(f"{directory}: not an LSI model directory")
    return LsiModel(
        doc_coords=read_embeddings(os.path.join(directory, "doc_coords.emb1")).data,
        term_loadings=read_embeddings(os.path.join(directory, "term_loadings.emb1")).data,
        singular_values=np.asarray(header["singular_values"], dtype=np.float64),
    )


def _write_matrix(matrix: np.ndarray, path) -> None:
    ids = tuple(str(i) for i in range(matrix.shape[0]))
    write_embeddings(EmbeddingMatrix(data=matrix, doc_ids=ids), path)
