"""Topic representation: class-based TF-IDF over cluster assignments.

Documents assigned to the same cluster are pooled into one pseudo-document
per class; a term's weight in class c is its share of the class's term
mass, damped by how common the term is across all classes:

    W(t, c) = (tf(t, c) / total(c)) * ln(1 + A / f(t))

with tf(t, c) the summed counts of t over the class, f(t) the summed
counts of t over all classes, and A the average class term mass.
Noise-labeled documents (label -1) contribute to no class.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .cluster import NOISE, ClusterAssignment
from .corpus import CountMatrix, Vocabulary
from .errors import EmptyClass


@dataclass(frozen=True)
class Topic:
    """One ranked topic: id plus (term, weight) pairs in descending weight."""

    topic_id: int
    terms: tuple[tuple[str, float], ...]

    @property
    def term_list(self) -> tuple[str, ...]:
        return tuple(t for t, _ in self.terms)


@dataclass(frozen=True)
class TopicSet:
    """Ranked term lists per topic."""

    topics: tuple[Topic, ...]
    n_terms: int

    def __len__(self) -> int:
        return len(self.topics)

    def __iter__(self):
        return iter(self.topics)

    def to_json_dict(self) -> dict:
        return {
            "n_terms": self.n_terms,
            "topics": [
                {"topic_id": t.topic_id, "terms": [[w, float(s)] for w, s in t.terms]}
                for t in self.topics
            ],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "TopicSet":
        topics = tuple(
            Topic(
                topic_id=int(t["topic_id"]),
                terms=tuple((str(w), float(s)) for w, s in t["terms"]),
            )
            for t in obj["topics"]
        )
        return cls(topics=topics, n_terms=int(obj["n_terms"]))

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_json_dict(), indent=indent)

    def to_markdown(self) -> str:
        """Topic table: one row per topic, comma-joined terms."""
        lines = ["| Topic | Terms |", "| --- | --- |"]
        for t in self.topics:
            lines.append(f"| Topic {t.topic_id + 1} | {', '.join(t.term_list)} |")
        return "\n".join(lines) + "\n"


def class_tfidf(
    counts: CountMatrix, assignment: ClusterAssignment
) -> tuple[np.ndarray, list[int]]:
    """Class-based TF-IDF weights.

    Returns the (n_classes, n_terms) weight matrix and the class label for
    each row. Raises :class:`EmptyClass` when a class has zero total count.
    """
    labels = assignment.labels
    if labels.shape[0] != counts.n_docs:
        raise ValueError(
            f"assignment covers {labels.shape[0]} documents, counts have {counts.n_docs}"
        )
    class_ids = sorted(int(c) for c in np.unique(labels) if c != NOISE)
    if not class_ids:
        raise EmptyClass("no non-noise class in assignment")
    m = counts.matrix
    tf = np.vstack(
        [np.asarray(m[labels == c].sum(axis=0)).ravel() for c in class_ids]
    ).astype(np.float64)
    totals = tf.sum(axis=1)
    empty = np.flatnonzero(totals == 0)
    if empty.size:
        raise EmptyClass(f"class {class_ids[empty[0]]} has zero total term count")
    f = tf.sum(axis=0)
    a = totals.mean()
    with np.errstate(divide="ignore"):
        damp = np.log1p(np.divide(a, f, out=np.zeros_like(f), where=f > 0))
    weights = (tf / totals[:, None]) * damp[None, :]
    return weights, class_ids


def top_terms(
    weights: np.ndarray,
    vocab: Vocabulary,
    n_terms: int,
    class_ids: list[int] | None = None,
) -> TopicSet:
    """Top ``n_terms`` terms per topic by weight, ties broken
    lexicographically. Shorter lists only when the vocabulary runs out."""
    if n_terms < 1:
        raise ValueError(f"n_terms must be >= 1, got {n_terms}")
    weights = np.asarray(weights, dtype=np.float64)
    if weights.ndim != 2 or weights.shape[1] != len(vocab):
        raise ValueError(
            f"weights shape {weights.shape} does not match vocabulary size {len(vocab)}"
        )
    if class_ids is None:
        class_ids = list(range(weights.shape[0]))
    topics = []
    terms = vocab.terms
    for row, topic_id in zip(weights, class_ids):
        ranked = sorted(zip(row, terms), key=lambda wt: (-wt[0], wt[1]))[:n_terms]
        topics.append(
            Topic(topic_id=topic_id, terms=tuple((t, float(w)) for w, t in ranked))
        )
    return TopicSet(topics=tuple(topics), n_terms=n_terms)
