"""Kernel density estimation detector and hold-out bandwidth selection."""

from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from src.anoscope.core.dimensions import ModelFamily
from src.anoscope.core.types import Dataset
from src.anoscope.errors import EmptyTrainingSet, NonPositiveGamma, UnsupportedCombination
from src.anoscope.kernels import KernelKind, KernelSpec, gamma_grid, rbf_kernel
from src.anoscope.models.base import BaseDetector
from src.utils.logging import get_logger

logger = get_logger(__name__)


@dataclass
class KDEModel(BaseDetector):
    """
    score(x) = -log[(1/n) sum_i exp(-gamma * dist^2(x, x_i))]

    The score drops the kernel normalization constant, so it is only comparable
    across models sharing gamma. ``log_density`` adds the constant back.
    """

    training_points: np.ndarray
    kernel: KernelSpec

    family: ClassVar[ModelFamily] = ModelFamily.KERNEL_DENSITY

    @property
    def n_features(self) -> int:
        return self.training_points.shape[1]

    @property
    def gamma(self) -> float:
        return self.kernel.gamma

    @property
    def n(self) -> int:
        return self.training_points.shape[0]

    def sqdist(self, X: np.ndarray) -> np.ndarray:
        return self.kernel.sqdist(X, self.training_points)

    def _score_rows(self, X: np.ndarray) -> np.ndarray:
        return -logsumexp(-self.gamma * self.sqdist(X), axis=1) + np.log(self.n)

    def log_normalizer(self) -> float:
        """log of (gamma/pi)^{D/2} det(M)^{1/2}, making each kernel bump a density."""
        dim = self.n_features
        value = 0.5 * dim * np.log(self.gamma / np.pi)
        if self.kernel.kind == KernelKind.MAHALANOBIS and self.kernel.metric is not None:
            sign, log_det = np.linalg.slogdet(self.kernel.metric)
            # a singular metric contributes the same constant for every gamma
            if sign > 0:
                value += 0.5 * log_det
        return float(value)

    def log_density(self, X: np.ndarray) -> np.ndarray:
        X = self._check(np.atleast_2d(np.asarray(X, dtype=np.float64)))
        return -self._score_rows(X) + self.log_normalizer()


def fit_kde(train: Dataset, gamma: Optional[float] = None, kernel: Optional[KernelSpec] = None) -> KDEModel:
    if kernel is None:
        if gamma is None:
            raise NonPositiveGamma("KDE needs a gamma or a kernel")
        kernel = rbf_kernel(gamma)
    elif gamma is not None:
        kernel = kernel.with_gamma(gamma)
    if kernel.kind == KernelKind.LINEAR:
        raise UnsupportedCombination("feature_map", "KDE needs an RBF or Mahalanobis kernel")
    if not kernel.gamma > 0:
        raise NonPositiveGamma(f"KDE gamma must be > 0, got {kernel.gamma}")

    model = KDEModel(training_points=train.rows.copy(), kernel=kernel)
    logger.info(f"fitted KDE on {train.n} rows with kernel {kernel.describe()}")
    return model


def select_bandwidth(
    train: Dataset,
    holdout: Dataset,
    grid: Optional[Sequence[float]] = None,
    kernel: Optional[KernelSpec] = None,
) -> float:
    """
    Return the gamma from ``grid`` maximizing the mean normalized log-likelihood
    of ``holdout`` under the KDE fitted on ``train``.
    """
    if holdout is None or holdout.n == 0:
        raise EmptyTrainingSet("bandwidth selection needs a non-empty hold-out set")
    grid = gamma_grid(train.dim) if grid is None else np.asarray(grid, dtype=np.float64)
    base = kernel if kernel is not None else rbf_kernel(1.0)

    best_gamma, best_ll = None, -np.inf
    for gamma in grid:
        model = fit_kde(train, kernel=base.with_gamma(float(gamma)))
        ll = float(model.log_density(holdout.rows).mean())
        logger.debug(f"KDE gamma={gamma:.6g}: hold-out mean log-likelihood {ll:.6f}")
        if ll > best_ll:
            best_gamma, best_ll = float(gamma), ll
    logger.info(f"selected KDE gamma={best_gamma:.6g} (hold-out mean log-likelihood {best_ll:.6f})")
    return best_gamma
