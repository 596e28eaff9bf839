"""Minimum-volume ellipsoid detector built on a FastMCD-style estimator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import ClassVar, List, Optional, Tuple

import numpy as np

from src.anoscope.core.dimensions import ModelFamily
from src.anoscope.core.types import Dataset
from src.anoscope.errors import InvalidConfig, SingularCovariance, SingularSubset
from src.anoscope.models.base import BaseDetector
from src.anoscope.models.gaussian import cholesky_factor, mahalanobis_sq, regularize_covariance
from src.utils.logging import get_logger

logger = get_logger(__name__)

N_STARTS = 20
N_CSTEPS = 10
MAX_SUBSET_DRAWS = 50


@dataclass
class MVEModel(BaseDetector):
    """score(x) = (x - c)^T Sigma^{-1} (x - c) - R^2"""

    center: np.ndarray
    shape: np.ndarray
    cholesky: np.ndarray
    radius2: float
    support_fraction: float
    contamination: float
    support_indices: np.ndarray
    log_det_history: List[float] = field(default_factory=list)

    family: ClassVar[ModelFamily] = ModelFamily.ELLIPSOID
    has_intrinsic_boundary: ClassVar[bool] = True

    @property
    def n_features(self) -> int:
        return self.center.shape[0]

    def _score_rows(self, X: np.ndarray) -> np.ndarray:
        return mahalanobis_sq(X, self.center, self.cholesky) - self.radius2


def _moments(X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    mean = X.mean(axis=0)
    centered = X - mean
    return mean, centered.T @ centered / X.shape[0]


def _start_subset(X: np.ndarray, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    n, dim = X.shape
    for _ in range(MAX_SUBSET_DRAWS):
        index = rng.choice(n, size=dim + 1, replace=False)
        mean, cov = _moments(X[index])
        sign, _ = np.linalg.slogdet(cov)
        if sign > 0:
            return mean, cov
        logger.debug("singular start subset, drawing a new one")
    raise SingularSubset(f"no non-singular ({dim + 1})-subset found in {MAX_SUBSET_DRAWS} draws")


def _c_steps(X: np.ndarray, h: int, mean: np.ndarray, cov: np.ndarray, n_steps: int):
    """Refit on the h points closest in Mahalanobis distance until det(cov) stops decreasing."""
    history: List[float] = []
    support: Optional[np.ndarray] = None
    for _ in range(n_steps):
        chol, _ = cholesky_factor(regularize_covariance(cov))
        closest = np.argsort(mahalanobis_sq(X, mean, chol), kind="stable")[:h]
        new_mean, new_cov = _moments(X[closest])
        sign, log_det = np.linalg.slogdet(new_cov)
        log_det = log_det if sign > 0 else -np.inf
        if history and log_det >= history[-1]:
            break
        mean, cov, support = new_mean, new_cov, np.sort(closest)
        history.append(float(log_det))
        if log_det == -np.inf:
            break
    return mean, cov, support, history


def fit_mve(
    train: Dataset,
    support_fraction: float = 0.9,
    contamination: float = 0.01,
    seed: int = 0,
    n_starts: int = N_STARTS,
    n_csteps: int = N_CSTEPS,
) -> MVEModel:
    """
    Best of ``n_starts`` random (D+1)-subset starts, each refined by C-steps.
    R^2 is the (1 - contamination)-quantile of the squared distances of the
    support points.
    """
    X = train.rows
    n, dim = X.shape
    if not 0.5 < support_fraction <= 1.0:
        raise InvalidConfig(f"support_fraction must lie in (0.5, 1], got {support_fraction}")
    if not 0.0 <= contamination < 1.0:
        raise InvalidConfig(f"contamination must lie in [0, 1), got {contamination}")
    h = math.ceil(support_fraction * n)
    if h < dim + 1 or n < dim + 1:
        raise InvalidConfig(f"MVE needs ceil(h n) >= D + 1 = {dim + 1}, got {h}")

    rng = np.random.default_rng(seed)
    best = None
    for start in range(n_starts):
        mean, cov = _start_subset(X, rng)
        mean, cov, support, history = _c_steps(X, h, mean, cov, n_csteps)
        if support is None:
            continue
        logger.debug(f"MCD start {start}: log det {history[-1]:.6f} after {len(history)} C-steps")
        if best is None or history[-1] < best[3][-1]:
            best = (mean, cov, support, history)
    if best is None:
        raise SingularSubset("every MCD start collapsed")

    center, shape, support, history = best
    try:
        shape = regularize_covariance(shape)
        chol, _ = cholesky_factor(shape)
    except SingularCovariance as exc:
        raise SingularSubset(f"MCD support covariance is singular: {exc}") from exc
    support_distances = mahalanobis_sq(X[support], center, chol)
    radius2 = float(np.quantile(support_distances, 1.0 - contamination))

    logger.info(
        f"fitted MVE on {n} rows (h={h}, contamination={contamination}): log det {history[-1]:.6f}, "
        f"R^2={radius2:.6g}"
    )
    return MVEModel(
        center=center,
        shape=shape,
        cholesky=chol,
        radius2=radius2,
        support_fraction=float(support_fraction),
        contamination=float(contamination),
        support_indices=support,
        log_det_history=history,
    )
