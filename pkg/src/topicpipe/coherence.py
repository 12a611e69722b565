"""Topic coherence scoring: UMass and the sliding-window NPMI measure (cv).

Both metrics run off boolean co-occurrence counts. UMass counts whole
documents and scores ordered term pairs by the smoothed log conditional
ln((D(w_m, w_l) + 1) / D(w_l)). The cv measure counts boolean sliding
windows (width 110 by default, stride 1; a document shorter than the
window yields exactly one window), turns pairwise NPMI values into one
context vector per term, and scores each term by the cosine between its
vector and the sum over the whole topic; topic score is the mean over
terms, the report aggregate the mean over topics.

Terms that never occur in the reference corpus cannot be scored; they are
dropped from their topic and listed in the report's ``skipped`` field.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateTopic
from .topics import TopicSet

# Sentinel window size: count whole documents instead of sliding windows.
WHOLE_DOC = 0

# Vocabulary n-grams are at most trigrams; occurrence scans stop there.
_MAX_NGRAM = 3

DEFAULT_CV_WINDOW = 110
DEFAULT_CV_EPSILON = 1e-12


@dataclass(frozen=True)
class CooccurrenceStats:
    """Boolean occurrence counts for a fixed term set.

    ``window`` is the sliding-window width, or WHOLE_DOC. Pair counts are
    stored for distinct unordered pairs; a term's joint count with itself
    equals its own count.
    """

    window: int
    n_windows: int
    term_counts: dict[str, int]
    pair_counts: dict[tuple[str, str], int]

    def count(self, term: str) -> int:
        return self.term_counts.get(term, 0)

    def pair_count(self, a: str, b: str) -> int:
        if a == b:
            return self.count(a)
        key = (a, b) if a <= b else (b, a)
        return self.pair_counts.get(key, 0)


def _occurrences(tokens: list[str], term_set: frozenset[str]) -> dict[str, list[tuple[int, int]]]:
    """Map each term to its (start, length) occurrences in the token list,
    matching every n-gram width up to the maximum."""
    occ: dict[str, list[tuple[int, int]]] = defaultdict(list)
    for n in range(1, _MAX_NGRAM + 1):
        for i in range(len(tokens) - n + 1):
            gram = tokens[i] if n == 1 else "_".join(tokens[i : i + n])
            if gram in term_set:
                occ[gram].append((i, n))
    return occ


def cooccurrence_stats(corpus_tokens, terms, window: int) -> CooccurrenceStats:
    """Count term and pair occurrences over documents or sliding windows.

    ``window`` = WHOLE_DOC counts documents containing the term(s); a width
    >= 1 counts boolean windows of that width with stride 1, a document
    shorter than the window contributing a single window.
    """
    if window != WHOLE_DOC and window < 1:
        raise ValueError(f"window must be >= 1 or WHOLE_DOC, got {window}")
    term_set = frozenset(terms)
    term_counts: dict[str, int] = defaultdict(int)
    pair_counts: dict[tuple[str, str], int] = defaultdict(int)
    n_windows = 0
    for tokens in corpus_tokens:
        occ = _occurrences(list(tokens), term_set)
        if window == WHOLE_DOC:
            n_windows += 1
            present = sorted(occ)
            for a_idx, a in enumerate(present):
                term_counts[a] += 1
                for b in present[a_idx + 1 :]:
                    pair_counts[(a, b)] += 1
            continue
        n_win = max(1, len(tokens) - window + 1)
        n_windows += n_win
        if not occ:
            continue
        present = sorted(occ)
        marks = np.zeros((len(present), n_win), dtype=bool)
        for row, term in enumerate(present):
            for start, length in occ[term]:
                lo = max(0, start + length - window)
                hi = min(start, n_win - 1)
                if lo <= hi:
                    marks[row, lo : hi + 1] = True
        counts = marks.astype(np.int64)
        hits = counts.sum(axis=1)
        joint = counts @ counts.T
        for a_idx, a in enumerate(present):
            if hits[a_idx]:
                term_counts[a] += int(hits[a_idx])
            for b_idx in range(a_idx + 1, len(present)):
                if joint[a_idx, b_idx]:
                    pair_counts[(a, present[b_idx])] += int(joint[a_idx, b_idx])
    return CooccurrenceStats(
        window=window,
        n_windows=n_windows,
        term_counts=dict(term_counts),
        pair_counts=dict(pair_counts),
    )


@dataclass(frozen=True)
class CoherenceReport:
    """Per-topic coherence scores and their arithmetic mean."""

    metric: str
    topic_ids: tuple[int, ...]
    per_topic: tuple[float, ...]
    aggregate: float
    params: dict
    skipped: tuple[tuple[str, ...], ...] = field(default=())

    def to_json_dict(self) -> dict:
        return {
            "metric": self.metric,
            "topic_ids": list(self.topic_ids),
            "per_topic": list(self.per_topic),
            "aggregate": self.aggregate,
            "params": dict(self.params),
            "skipped": [list(s) for s in self.skipped],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "CoherenceReport":
        return cls(
            metric=str(obj["metric"]),
            topic_ids=tuple(int(t) for t in obj["topic_ids"]),
            per_topic=tuple(float(x) for x in obj["per_topic"]),
            aggregate=float(obj["aggregate"]),
            params=dict(obj["params"]),
            skipped=tuple(tuple(str(w) for w in s) for s in obj.get("skipped", [])),
        )

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_json_dict(), indent=indent)

    def csv_row(self, model: str, components: str) -> str:
        return f"{model},{components},{self.aggregate!r}"


def umass(topics: TopicSet, stats: CooccurrenceStats) -> CoherenceReport:
    """UMass coherence from whole-document counts.

    For a topic with ordered terms w_1..w_T, the score is the mean over
    pairs (m > l) of ln((D(w_m, w_l) + 1) / D(w_l)). Terms with D = 0 are
    skipped and reported; fewer than two scorable terms raises
    :class:`DegenerateTopic`.
    """
    if stats.window != WHOLE_DOC:
        raise ValueError("umass requires stats built with WHOLE_DOC counting")
    topic_ids, per_topic, skipped_all = [], [], []
    for topic in topics:
        ordered = [t for t in topic.term_list if stats.count(t) > 0]
        skipped = tuple(t for t in topic.term_list if stats.count(t) == 0)
        if len(ordered) < 2:
            raise DegenerateTopic(
                f"topic {topic.topic_id} has {len(ordered)} scorable terms"
            )
        pair_scores = []
        for m in range(1, len(ordered)):
            for l in range(m):
                joint = stats.pair_count(ordered[m], ordered[l])
                base = stats.count(ordered[l])
                score = math.log((joint + 1) / base)
                # Co-occurrence never exceeds occurrence, so each pair is
                # bounded by ln 2.
                if score > math.log(2.0) + 1e-12:
                    raise AssertionError(
                        f"umass pair score {score} exceeds ln 2 for "
                        f"({ordered[m]}, {ordered[l]})"
                    )
                pair_scores.append(score)
        topic_ids.append(topic.topic_id)
        per_topic.append(float(np.mean(pair_scores)))
        skipped_all.append(skipped)
    return CoherenceReport(
        metric="umass",
        topic_ids=tuple(topic_ids),
        per_topic=tuple(per_topic),
        aggregate=float(np.mean(per_topic)),
        params={"window": WHOLE_DOC},
        skipped=tuple(skipped_all),
    )


def cv(
    topics: TopicSet,
    corpus_tokens,
    window: int = DEFAULT_CV_WINDOW,
    epsilon: float = DEFAULT_CV_EPSILON,
) -> CoherenceReport:
    """Sliding-window NPMI coherence with context-vector cosines.

    Probabilities come from boolean windows of the given width. Each term's
    context vector holds its NPMI against every topic term (itself
    included); the topic vector is the sum of all member vectors; a term
    scores the cosine between its vector and the topic vector, and the
    topic scores the mean over terms.
    """
    corpus_tokens = [list(t) for t in corpus_tokens]
    if not corpus_tokens:
        raise ValueError("cv requires a non-empty corpus")
    all_terms = {t for topic in topics for t in topic.term_list}
    stats = cooccurrence_stats(corpus_tokens, all_terms, window)
    total = stats.n_windows
    topic_ids, per_topic, skipped_all = [], [], []
    for topic in topics:
        terms = [t for t in topic.term_list if stats.count(t) > 0]
        skipped = tuple(t for t in topic.term_list if stats.count(t) == 0)
        if not terms:
            raise DegenerateTopic(f"topic {topic.topic_id} has no scorable terms")
        t_count = len(terms)
        npmi = np.empty((t_count, t_count))
        probs = np.array([stats.count(t) / total for t in terms])
        for i in range(t_count):
            for j in range(t_count):
                joint = stats.pair_count(terms[i], terms[j]) / total + epsilon
                npmi[i, j] = math.log(joint / (probs[i] * probs[j])) / -math.log(joint)
        if not npmi.any():
            raise DegenerateTopic(f"topic {topic.topic_id} has all-zero context vectors")
        topic_vector = npmi.sum(axis=0)
        tv_norm = np.linalg.norm(topic_vector)
        scores = []
        for i in range(t_count):
            norm = np.linalg.norm(npmi[i])
            if norm == 0.0 or tv_norm == 0.0:
                scores.append(0.0)
            else:
                cos = float(npmi[i] @ topic_vector / (norm * tv_norm))
                scores.append(min(1.0, max(-1.0, cos)))
        topic_ids.append(topic.topic_id)
        per_topic.append(float(np.mean(scores)))
        skipped_all.append(skipped)
    return CoherenceReport(
        metric="cv",
        topic_ids=tuple(topic_ids),
        per_topic=tuple(per_topic),
        aggregate=float(np.mean(per_topic)),
        params={"window": window, "epsilon": epsilon},
        skipped=tuple(skipped_all),
    )
