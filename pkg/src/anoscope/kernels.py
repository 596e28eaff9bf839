"""Kernel functions shared by KDE, SVDD, OC-SVM and kernel PCA."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from src.anoscope.errors import NonPositiveGamma, NonPSDMatrix, TooFewSamples

# relative eigenvalue tolerance when checking a metric matrix for PSD-ness
PSD_TOLERANCE = 1e-10


class KernelKind(str, Enum):
    RBF = "rbf"
    MAHALANOBIS = "mahalanobis"
    LINEAR = "linear"


@dataclass
class KernelSpec:
    """
    Kernel family plus parameters.

    RBF:          k(x, y) = exp(-gamma * ||x - y||^2)
    MAHALANOBIS:  k(x, y) = exp(-gamma * (x - y)^T M (x - y))
    LINEAR:       k(x, y) = <x, y>
    """

    kind: KernelKind
    gamma: float = 1.0
    metric: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        self.kind = KernelKind(self.kind)
        if self.kind != KernelKind.LINEAR and not self.gamma > 0:
            raise NonPositiveGamma(f"kernel gamma must be > 0, got {self.gamma}")
        self.gamma = float(self.gamma)
        if self.metric is not None:
            self.metric = np.asarray(self.metric, dtype=np.float64)
        self._root = None

    @property
    def is_constant_norm(self) -> bool:
        """k(x, x) is the same for every x (true for translation-invariant kernels)."""
        return self.kind != KernelKind.LINEAR

    def with_gamma(self, gamma: float) -> "KernelSpec":
        return KernelSpec(self.kind, gamma, self.metric)

    def _transform(self, X: np.ndarray) -> np.ndarray:
        # x -> L x with L^T L = M, so Mahalanobis distances become Euclidean ones
        if self.kind != KernelKind.MAHALANOBIS or self.metric is None:
            return X
        root = getattr(self, "_root", None)
        if root is None:
            root = self._root = psd_root(self.metric)
        return X @ root.T

    def sqdist(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """Squared (Euclidean or Mahalanobis) distances between the rows of X and Y."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
        return cdist(self._transform(X), self._transform(Y), "sqeuclidean")

    def __call__(self, X: np.ndarray, Y: Optional[np.ndarray] = None) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        Y = X if Y is None else np.atleast_2d(np.asarray(Y, dtype=np.float64))
        if self.kind == KernelKind.LINEAR:
            return X @ Y.T
        return np.exp(-self.gamma * self.sqdist(X, Y))

    def diag(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if self.kind == KernelKind.LINEAR:
            return np.einsum("ij,ij->i", X, X)
        return np.ones(X.shape[0])

    def describe(self) -> str:
        if self.kind == KernelKind.LINEAR:
            return "linear"
        return f"{self.kind.value}(gamma={self.gamma:.4g})"


def psd_root(M: np.ndarray) -> np.ndarray:
    """Return L with L^T L = M for a symmetric PSD matrix M."""
    eigvals, eigvecs = np.linalg.eigh(M)
    eigvals = np.clip(eigvals, 0.0, None)
    return np.sqrt(eigvals)[:, None] * eigvecs.T


def check_psd(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NonPSDMatrix(f"metric matrix must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise NonPSDMatrix("metric matrix contains non-finite entries")
    if not np.allclose(M, M.T, atol=1e-12, rtol=1e-10):
        raise NonPSDMatrix("metric matrix is not symmetric")
    eigvals = np.linalg.eigvalsh(M)
    scale = max(float(np.max(np.abs(eigvals))), 1.0)
    if eigvals[0] < -PSD_TOLERANCE * scale:
        raise NonPSDMatrix(f"metric matrix has negative eigenvalue {eigvals[0]:.3e}")
    return 0.5 * (M + M.T)


def rbf_kernel(gamma: float) -> KernelSpec:
    return KernelSpec(KernelKind.RBF, gamma)


def linear_kernel() -> KernelSpec:
    return KernelSpec(KernelKind.LINEAR)


def mahalanobis_kernel(M: np.ndarray, gamma: float = 1.0) -> KernelSpec:
    """k(x, y) = exp(-gamma (x-y)^T M (x-y)); M = I gives back the RBF kernel."""
    return KernelSpec(KernelKind.MAHALANOBIS, gamma, check_psd(M))


def gamma_grid(dim: int, exponents=range(-5, 6)) -> np.ndarray:
    """Kernel scales gamma = 1 / (2^i * D) for i in ``exponents``."""
    return np.array([1.0 / (2.0**i * dim) for i in exponents])


def median_heuristic_gamma(X: np.ndarray) -> float:
    """
    gamma = ln 2 / median pairwise squared distance, so the median neighbour
    pair has similarity exactly 1/2 and the nearer half of all pairs has
    similarity >= 1/2.

    Holding the nearest-half share of similarity mass at exactly 50% instead
    has no usable root: that share only grows with gamma and already sits at
    (or just below) 1/2 as gamma -> 0, where the kernel turns linear. See
    nearest_half_mass_share.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    sq = cdist(X, X, "sqeuclidean")
    off_diagonal = sq[np.triu_indices(X.shape[0], k=1)]
    positive = off_diagonal[off_diagonal > 0]
    if positive.size == 0:
        return 1.0
    return float(np.log(2.0) / np.median(positive))


def nearest_half_mass_share(X: np.ndarray, gamma: float) -> float:
    """
    Mean fraction of each row's RBF similarity mass that falls on its nearest
    floor((n-1)/2) neighbours. Non-decreasing in gamma, from m/(n-1) as
    gamma -> 0 towards 1.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    n = X.shape[0]
    if n < 3:
        raise TooFewSamples(f"mass share needs at least 3 rows, got {n}")
    if not gamma > 0:
        raise NonPositiveGamma(f"gamma must be > 0, got {gamma}")
    sq = cdist(X, X, "sqeuclidean")
    np.fill_diagonal(sq, np.inf)
    sq = np.sort(sq, axis=1)[:, : n - 1]
    # shift by the nearest distance so far rows do not underflow to 0/0
    weights = np.exp(-gamma * (sq - sq[:, :1]))
    near = weights[:, : (n - 1) // 2].sum(axis=1)
    return float(np.mean(near / weights.sum(axis=1)))
