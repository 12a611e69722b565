"""Dimensionality reduction: PCA, kernel PCA and truncated SVD.

All three reducers sit on one symmetric top-k eigensolver whose contract is
a residual bound: every returned pair (mu, alpha) satisfies
``||M a - mu a||_2 <= tol * ||M||_F``. Kernel PCA computes the kernel
matrix, double-centers it (raw embeddings never have zero feature-space
mean, so the centering that the textbook derivation assumes has to be done
explicitly), solves the centered-kernel eigenproblem, rescales each
coefficient vector by 1/sqrt(mu) so the implicit feature-space eigenvector
has unit norm, and projects.

Sign convention everywhere: the largest-magnitude entry of each eigenvector
(or right singular vector) is positive, ties broken by the first such
index. This makes projections reproducible across runs and platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .embeddings import EmbeddingMatrix
from .errors import ConvergenceError, RankError

# Relative cutoff below which an eigenvalue (or singular value) is treated
# as numerically zero when deciding rank.
_RANK_RTOL = 1e-12


def _as_2d(x) -> np.ndarray:
    if isinstance(x, EmbeddingMatrix):
        return x.data
    if isinstance(x, ReducedMatrix):
        return x.data
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class KernelConfig:
    """Kernel choice for kernel PCA: ``rbf`` (width ``gamma``) or ``linear``."""

    kind: str = "rbf"
    gamma: float = 15.0

    def __post_init__(self):
        if self.kind not in ("rbf", "linear"):
            raise ValueError(f"kernel kind must be 'rbf' or 'linear', got {self.kind!r}")
        if self.kind == "rbf" and not self.gamma > 0:
            raise ValueError(f"rbf gamma must be positive, got {self.gamma}")


@dataclass(frozen=True)
class EigenResult:
    """Top-k eigenpairs: eigenvalues descending, eigenvectors as orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class ReducedMatrix:
    """N x k reduced document coordinates plus the method that produced them."""

    data: np.ndarray
    method: str
    components: int

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=np.float64)
        if data.ndim != 2 or data.shape[1] != self.components:
            raise ValueError(
                f"reduced data shape {data.shape} inconsistent with k={self.components}"
            )
        if not np.all(np.isfinite(data)):
            raise ValueError("reduced coordinates must be finite")
        object.__setattr__(self, "data", data)

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so the largest-magnitude entry of each is positive."""
    if vectors.size == 0:
        return vectors
    lead = np.abs(vectors).argmax(axis=0)
    signs = np.sign(vectors[lead, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def sym_eigs_topk(m, k: int, tol: float = 1e-8) -> EigenResult:
    """Top-k eigenpairs of a symmetric matrix, by descending eigenvalue.

    Parameters
    ----------
    m : (N, N) array
        Symmetric within 1e-10 relative Frobenius asymmetry.
    k : int
        Number of pairs, 1 <= k <= N.
    tol : float
        Residual bound: each pair must satisfy
        ``||m a - mu a||_2 <= tol * ||m||_F`` or :class:`ConvergenceError`
        is raised.
    """
    m = _as_2d(m)
    n = m.shape[0]
    if m.shape[1] != n:
        raise ValueError(f"matrix must be square, got shape {m.shape}")
    norm = np.linalg.norm(m, "fro")
    if norm > 0 and np.linalg.norm(m - m.T, "fro") > 1e-10 * norm:
        raise ValueError("matrix is not symmetric within 1e-10 relative tolerance")
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= {n}, got {k}")
    sym = 0.5 * (m + m.T)
    eigenvalues, eigenvectors = np.linalg.eigh(sym)
    order = np.argsort(eigenvalues)[::-1][:k]
    values = eigenvalues[order]
    vectors = _fix_signs(eigenvectors[:, order])
    residual = np.linalg.norm(m @ vectors - vectors * values, axis=0)
    bound = tol * norm
    if np.any(residual > bound):
        worst = float(residual.max())
        raise ConvergenceError(
            f"eigenpair residual {worst:.3e} exceeds bound {bound:.3e}"
        )
    return EigenResult(eigenvalues=values, eigenvectors=vectors)


def pca_fit_transform(x, k: int) -> ReducedMatrix:
    """Project onto the top-k eigenvectors of the covariance matrix
    C = (1/N) sum_i x_i x_i^T of the column-centered data.

    Column j of the output has variance equal to the j-th eigenvalue.
    Raises :class:`RankError` if the data has fewer than k nonzero
    covariance eigenvalues.
    """
    x = _as_2d(x)
    n, d = x.shape
    if not 1 <= k <= min(n, d):
        raise ValueError(f"k must satisfy 1 <= k <= min(N, D) = {min(n, d)}, got {k}")
    centered = x - x.mean(axis=0)
    cov = (centered.T @ centered) / n
    eig = sym_eigs_topk(cov, k)
    cutoff = _RANK_RTOL * max(eig.eigenvalues[0], 0.0)
    admissible = int(np.sum(eig.eigenvalues > cutoff)) if eig.eigenvalues[0] > 0 else 0
    if admissible < k:
        raise RankError(f"requested {k} components but data has rank {admissible}")
    return ReducedMatrix(data=centered @ eig.eigenvectors, method="pca", components=k)


def compute_kernel(x, cfg: KernelConfig) -> np.ndarray:
    """N x N kernel matrix: ``exp(-gamma * ||x_i - x_j||^2)`` for rbf,
    ``x_i . x_j`` for linear. Symmetric; rbf diagonal is exactly 1."""
    x = _as_2d(x)
    if cfg.kind == "linear":
        k = x @ x.T
        return 0.5 * (k + k.T)
    sq = np.sum(x * x, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d2, 0.0, out=d2)
    k = np.exp(-cfg.gamma * d2)
    k = 0.5 * (k + k.T)
    np.fill_diagonal(k, 1.0)
    return k


def center_kernel(k) -> np.ndarray:
    """Double-center a kernel matrix: K' = K - 1K - K1 + 1K1 with 1 the
    matrix of 1/N entries. Every row and column of the result sums to ~0."""
    k = _as_2d(k)
    row_means = k.mean(axis=1, keepdims=True)
    col_means = k.mean(axis=0, keepdims=True)
    grand = k.mean()
    return k - row_means - col_means + grand


class KernelPcaModel:
    """Fitted kernel PCA state, kept for out-of-sample projection.

    ``alphas`` holds the centered-kernel eigenvectors scaled by
    1/sqrt(eigenvalue), so projections are kernel rows times ``alphas``.
    """

    def __init__(
        self,
        train: np.ndarray,
        cfg: KernelConfig,
        alphas: np.ndarray,
        eigenvalues: np.ndarray,
        train_kernel_col_means: np.ndarray,
        train_kernel_mean: float,
    ):
        self.train = train
        self.cfg = cfg
        self.alphas = alphas
        self.eigenvalues = eigenvalues
        self._col_means = train_kernel_col_means
        self._grand_mean = train_kernel_mean

    def transform(self, x) -> np.ndarray:
        """Project new rows with the centering correction applied to their
        kernel rows against the training set."""
        x = _as_2d(x)
        if self.cfg.kind == "linear":
            rows = x @ self.train.T
        else:
            d2 = (
                np.sum(x * x, axis=1)[:, None]
                + np.sum(self.train * self.train, axis=1)[None, :]
                - 2.0 * (x @ self.train.T)
            )
            np.maximum(d2, 0.0, out=d2)
            rows = np.exp(-self.cfg.gamma * d2)
        centered = (
            rows
            - rows.mean(axis=1, keepdims=True)
            - self._col_means[None, :]
            + self._grand_mean
        )
        return centered @ self.alphas


def kpca_fit(x, k: int, cfg: KernelConfig) -> tuple[KernelPcaModel, ReducedMatrix]:
    """Fit kernel PCA and return the model plus training projections.

    Solves ``N lambda a = K' a`` on the centered kernel K' for the top-k
    pairs, rejecting eigenvalues below 1e-12 times the largest
    (:class:`RankError` if fewer than k remain), rescales each eigenvector
    by 1/sqrt(mu) so the feature-space eigenvector has unit norm, and
    projects the training data as K' times the scaled coefficients.
    """
    x = _as_2d(x)
    n = x.shape[0]
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must satisfy 1 <= k <= N-1 = {n - 1}, got {k}")
    kernel = compute_kernel(x, cfg)
    col_means = kernel.mean(axis=0)
    grand = kernel.mean()
    centered = center_kernel(kernel)
    eig = sym_eigs_topk(centered, k)
    cutoff = _RANK_RTOL * max(eig.eigenvalues[0], 0.0)
    admissible = eig.eigenvalues > cutoff if eig.eigenvalues[0] > 0 else np.zeros(k, bool)
    if int(admissible.sum()) < k:
        raise RankError(
            f"requested {k} kernel components but only {int(admissible.sum())} "
            f"eigenvalues exceed the rank cutoff"
        )
    alphas = eig.eigenvectors / np.sqrt(eig.eigenvalues)
    model = KernelPcaModel(
        train=x,
        cfg=cfg,
        alphas=alphas,
        eigenvalues=eig.eigenvalues,
        train_kernel_col_means=col_means,
        train_kernel_mean=grand,
    )
    reduced = ReducedMatrix(data=centered @ alphas, method="kpca", components=k)
    return model, reduced


def kpca_fit_transform(x, k: int, cfg: KernelConfig | None = None) -> ReducedMatrix:
    """Kernel PCA projections of the input rows (defaults: rbf, gamma 15)."""
    _, reduced = kpca_fit(x, k, cfg or KernelConfig())
    return reduced


def _svd_factors(
    m, k: int, algorithm: str = "exact", random_state: int = 0
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin rank-k SVD factors (U, s, V) with the sign convention applied to
    the columns of V and U flipped to match."""
    is_sparse = sparse.issparse(m)
    if not is_sparse:
        m = _as_2d(m)
    n, d = m.shape
    if not 1 <= k <= min(n, d):
        raise ValueError(f"k must satisfy 1 <= k <= min(N, D) = {min(n, d)}, got {k}")
    if algorithm == "randomized":
        u, s, v = _randomized_svd(m, k, random_state)
    elif algorithm == "exact":
        u, s, v = _gram_svd(m, k)
    else:
        raise ValueError(f"algorithm must be 'exact' or 'randomized', got {algorithm!r}")
    if s[0] <= 0 or s[k - 1] <= _RANK_RTOL * s[0]:
        rank = int(np.sum(s > _RANK_RTOL * s[0])) if s[0] > 0 else 0
        raise RankError(f"requested {k} singular values but matrix has rank {rank}")
    lead = np.abs(v).argmax(axis=0)
    signs = np.sign(v[lead, np.arange(k)])
    signs[signs == 0] = 1.0
    return u * signs, s, v * signs


def _gram_svd(m, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # Eigendecompose the smaller Gram matrix and recover the other factor.
    n, d = m.shape
    if d <= n:
        gram = np.asarray((m.T @ m).todense()) if sparse.issparse(m) else m.T @ m
        eig = sym_eigs_topk(gram, k)
        s = np.sqrt(np.maximum(eig.eigenvalues, 0.0))
        v = eig.eigenvectors
        with np.errstate(divide="ignore", invalid="ignore"):
            u = np.where(s > 0, (m @ v) / s, 0.0)
    else:
        gram = np.asarray((m @ m.T).todense()) if sparse.issparse(m) else m @ m.T
        eig = sym_eigs_topk(gram, k)
        s = np.sqrt(np.maximum(eig.eigenvalues, 0.0))
        u = eig.eigenvectors
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.where(s > 0, (m.T @ u) / s, 0.0)
    return np.asarray(u), s, np.asarray(v)


def _randomized_svd(m, k: int, random_state: int, n_oversamples: int = 10, n_iter: int = 4):
    # Halko-Martinsson-Tropp range finder with power iterations.
    n, d = m.shape
    rng = np.random.default_rng(random_state)
    width = min(d, k + n_oversamples)
    q = m @ rng.standard_normal((d, width))
    q = np.linalg.qr(np.asarray(q))[0]
    for _ in range(n_iter):
        q = np.linalg.qr(np.asarray(m.T @ q))[0]
        q = np.linalg.qr(np.asarray(m @ q))[0]
    b = np.asarray(q.T @ m)
    ub, s, vt = np.linalg.svd(b, full_matrices=False)
    return (q @ ub)[:, :k], s[:k], vt[:k].T


def truncated_svd(m, k: int, algorithm: str = "exact", random_state: int = 0) -> ReducedMatrix:
    """Rank-k SVD returning document coordinates U_k Sigma_k.

    Works on dense or sparse input. ``algorithm='randomized'`` uses a seeded
    range-finder; ``'exact'`` goes through the smaller Gram matrix. Raises
    :class:`RankError` when the matrix has fewer than k nonzero singular
    values.
    """
    u, s, _ = _svd_factors(m, k, algorithm=algorithm, random_state=random_state)
    return ReducedMatrix(data=u * s, method="svd", components=k)
