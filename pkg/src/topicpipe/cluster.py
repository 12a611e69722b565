"""Clustering stage: k-means with k-means++ seeding, Ward agglomerative, DBSCAN.

K-means follows the four-step loop: seed, assign every object to its
closest centroid by squared Euclidean distance, move centroids to their
cluster means, repeat until no object changes cluster. Restarts run with
seeds derived from the caller's seed and the lowest-inertia run wins. An
empty cluster is repaired by re-seeding its centroid at the point farthest
from its currently assigned centroid, which keeps per-iteration inertia
non-increasing (checked at every iteration).

Ward linkage uses the Lance-Williams update on the variance-increase
distance with a smallest-pair-index tie-break; the distance matrix is kept
dense, so it is meant for corpora up to a few thousand documents. DBSCAN is
the standard core/border/noise expansion with Euclidean metric, label -1
marking noise.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .dimred import ReducedMatrix

NOISE = -1


def _points(y) -> np.ndarray:
    if isinstance(y, ReducedMatrix):
        return y.data
    arr = np.asarray(y, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"expected points as a 2-D array, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class CentroidSet:
    """K x P centroid coordinates."""

    centroids: np.ndarray

    def __post_init__(self):
        c = np.ascontiguousarray(self.centroids, dtype=np.float64)
        if c.ndim != 2 or c.shape[0] < 1:
            raise ValueError(f"centroids must be a non-empty 2-D array, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("centroids must be finite")
        object.__setattr__(self, "centroids", c)

    def __len__(self) -> int:
        return self.centroids.shape[0]


@dataclass(frozen=True)
class ClusterAssignment:
    """Per-document labels plus run diagnostics.

    ``inertia`` is the k-means objective (None for the other methods);
    ``inertia_history`` records the objective after each Lloyd assignment
    of the winning restart. ``labels`` may contain NOISE (-1) for density
    methods.
    """

    labels: np.ndarray
    inertia: float | None = None
    n_iter: int = 0
    inertia_history: tuple[float, ...] = field(default=(), compare=False)

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim != 1:
            raise ValueError("labels must be 1-D")
        object.__setattr__(self, "labels", labels)

    @property
    def n_clusters(self) -> int:
        non_noise = self.labels[self.labels != NOISE]
        return int(non_noise.max()) + 1 if non_noise.size else 0

    def to_json_dict(self) -> dict:
        return {
            "labels": self.labels.tolist(),
            "inertia": self.inertia,
            "n_iter": self.n_iter,
        }


def _sq_dists(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d2 = (
        np.sum(points * points, axis=1)[:, None]
        + np.sum(centers * centers, axis=1)[None, :]
        - 2.0 * (points @ centers.T)
    )
    np.maximum(d2, 0.0, out=d2)
    return d2


def kmeanspp_init(y, k: int, seed: int) -> CentroidSet:
    """k-means++ seeding: first centroid uniform over the points, each next
    one sampled with probability proportional to squared distance from the
    nearest centroid chosen so far. Deterministic given the seed."""
    points = _points(y)
    n = points.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= {n}, got {k}")
    rng = np.random.default_rng(seed)
    chosen = [int(rng.integers(n))]
    best_d2 = _sq_dists(points, points[chosen[-1]][None, :]).ravel()
    for _ in range(1, k):
        total = best_d2.sum()
        if total > 0:
            probs = best_d2 / total
            idx = int(rng.choice(n, p=probs))
        else:
            # All remaining distances are zero (duplicate points): fall back
            # to a uniform draw over the not-yet-chosen indices.
            remaining = np.setdiff1d(np.arange(n), np.asarray(chosen))
            idx = int(rng.choice(remaining))
        chosen.append(idx)
        np.minimum(best_d2, _sq_dists(points, points[idx][None, :]).ravel(), out=best_d2)
    return CentroidSet(centroids=points[chosen].copy())


def _lloyd(points: np.ndarray, centers: np.ndarray, max_iter: int):
    n = points.shape[0]
    prev_labels = None
    history: list[float] = []
    labels = np.zeros(n, dtype=np.int64)
    n_iter = 0
    for it in range(1, max_iter + 1):
        n_iter = it
        d2 = _sq_dists(points, centers)
        labels = d2.argmin(axis=1)
        # Assigned distances recomputed directly: exact zeros for points
        # sitting on their centroid, unlike the expanded form.
        diff = points - centers[labels]
        assigned_d2 = np.einsum("ij,ij->i", diff, diff)
        present = np.bincount(labels, minlength=centers.shape[0])
        for j in np.flatnonzero(present == 0):
            far = int(assigned_d2.argmax())
            centers[j] = points[far]
            labels[far] = j
            assigned_d2[far] = 0.0
        inertia = float(assigned_d2.sum())
        if history and inertia > history[-1] * (1.0 + 1e-10) + 1e-12:
            raise AssertionError(
                f"inertia increased across Lloyd iterations: {history[-1]} -> {inertia}"
            )
        history.append(inertia)
        if prev_labels is not None and np.array_equal(labels, prev_labels):
            break
        prev_labels = labels
        for j in range(centers.shape[0]):
            centers[j] = points[labels == j].mean(axis=0)
    return labels, centers, history, n_iter


def kmeans(
    y, k: int, n_init: int = 10, max_iter: int = 300, seed: int = 0
) -> tuple[ClusterAssignment, CentroidSet]:
    """Lloyd k-means over ``n_init`` k-means++ restarts; the restart with the
    lowest inertia wins. Convergence criterion is label stability: the loop
    stops once no object moves between clusters."""
    points = _points(y)
    if not 1 <= k <= points.shape[0]:
        raise ValueError(f"k must satisfy 1 <= k <= {points.shape[0]}, got {k}")
    if n_init < 1 or max_iter < 1:
        raise ValueError("n_init and max_iter must be >= 1")
    restart_seeds = [
        int(child.generate_state(1)[0])
        for child in np.random.SeedSequence(seed).spawn(n_init)
    ]
    best = None
    for restart_seed in restart_seeds:
        centers = kmeanspp_init(points, k, restart_seed).centroids.copy()
        labels, centers, history, n_iter = _lloyd(points, centers, max_iter)
        if best is None or history[-1] < best[2][-1]:
            best = (labels, centers, history, n_iter)
    labels, centers, history, n_iter = best
    assignment = ClusterAssignment(
        labels=labels,
        inertia=history[-1],
        n_iter=n_iter,
        inertia_history=tuple(history),
    )
    return assignment, CentroidSet(centroids=centers)


def ward_merge_sequence(y) -> list[tuple[frozenset, frozenset, float]]:
    """Full Ward merge sequence as (members_a, members_b, height) triples.

    Heights are the Ward variance-increase distances, non-decreasing along
    the sequence. Ties are broken on the smallest pair of active cluster
    slots; a merged cluster keeps the smaller slot, so slots coincide with
    the smallest member index.
    """
    points = _points(y)
    n = points.shape[0]
    dist = 0.5 * _sq_dists(points, points)
    np.fill_diagonal(dist, np.inf)
    active = np.ones(n, dtype=bool)
    sizes = np.ones(n, dtype=np.int64)
    members: list[set[int]] = [{i} for i in range(n)]
    merges: list[tuple[frozenset, frozenset, float]] = []
    for _ in range(n - 1):
        flat = int(np.argmin(dist))
        i, j = divmod(flat, n)
        if i > j:
            i, j = j, i
        height = float(dist[i, j])
        merges.append((frozenset(members[i]), frozenset(members[j]), height))
        si, sj = sizes[i], sizes[j]
        others = np.flatnonzero(active)
        others = others[(others != i) & (others != j)]
        if others.size:
            new = (
                (si + sizes[others]) * dist[i, others]
                + (sj + sizes[others]) * dist[j, others]
                - sizes[others] * height
            ) / (si + sj + sizes[others])
            dist[i, others] = new
            dist[others, i] = new
        members[i] |= members[j]
        sizes[i] = si + sj
        active[j] = False
        dist[j, :] = np.inf
        dist[:, j] = np.inf
    return merges


def agglomerative(y, k: int) -> ClusterAssignment:
    """Bottom-up Ward clustering cut at ``k`` clusters. Labels are assigned
    in order of each cluster's smallest member index."""
    points = _points(y)
    n = points.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= {n}, got {k}")
    merges = ward_merge_sequence(points)[: n - k]
    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for members_a, members_b, _ in merges:
        ra, rb = find(min(members_a)), find(min(members_b))
        lo, hi = min(ra, rb), max(ra, rb)
        parent[hi] = lo
    roots = sorted({find(i) for i in range(n)})
    relabel = {r: c for c, r in enumerate(roots)}
    labels = np.array([relabel[find(i)] for i in range(n)], dtype=np.int64)
    return ClusterAssignment(labels=labels, inertia=None, n_iter=n - k)


def dbscan(y, eps: float, min_samples: int) -> ClusterAssignment:
    """Density-based clustering with Euclidean metric: points with at least
    ``min_samples`` neighbors within ``eps`` (inclusive, self included) are
    cores; clusters grow from cores in index order; unreached points are
    NOISE."""
    points = _points(y)
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if min_samples < 1:
        raise ValueError(f"min_samples must be >= 1, got {min_samples}")
    n = points.shape[0]
    eps2 = eps * eps
    neighbors: list[np.ndarray] = []
    chunk = 1024
    for start in range(0, n, chunk):
        d2 = _sq_dists(points[start : start + chunk], points)
        for row in d2:
            neighbors.append(np.flatnonzero(row <= eps2))
    core = np.array([len(nb) >= min_samples for nb in neighbors])
    labels = np.full(n, NOISE, dtype=np.int64)
    cluster = 0
    for i in range(n):
        if labels[i] != NOISE or not core[i]:
            continue
        labels[i] = cluster
        frontier = deque([i])
        while frontier:
            p = frontier.popleft()
            for q in neighbors[p]:
                if labels[q] == NOISE:
                    labels[q] = cluster
                    if core[q]:
                        frontier.append(int(q))
        cluster += 1
    return ClusterAssignment(labels=labels, inertia=None, n_iter=1)
