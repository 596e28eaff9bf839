"""Multivariate Gaussian detector scoring by squared Mahalanobis distance."""

from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar, Tuple

import numpy as np
from scipy import linalg

from src.anoscope.core.dimensions import ModelFamily
from src.anoscope.core.types import Dataset
from src.anoscope.errors import SingularCovariance, TooFewSamples
from src.anoscope.models.base import BaseDetector
from src.utils.logging import get_logger

logger = get_logger(__name__)

JITTER_SCALE = 1e-9
LOG_2PI = np.log(2.0 * np.pi)


def regularize_covariance(cov: np.ndarray, jitter_scale: float = JITTER_SCALE) -> np.ndarray:
    """
    Symmetrize ``cov`` and lift its spectrum to at least jitter_scale * trace / D.
    """
    cov = 0.5 * (cov + cov.T)
    dim = cov.shape[0]
    floor = jitter_scale * float(np.trace(cov)) / dim
    if not floor > 0:
        raise SingularCovariance("covariance has zero trace; all points coincide")
    smallest = float(np.linalg.eigvalsh(cov)[0])
    if smallest < floor:
        logger.warning(f"covariance near-singular (min eigenvalue {smallest:.3e}), adding jitter")
        cov = cov + (floor - smallest) * np.eye(dim)
    return cov


def cholesky_factor(cov: np.ndarray) -> Tuple[np.ndarray, float]:
    """Lower Cholesky factor and log-determinant of ``cov``."""
    try:
        chol = linalg.cholesky(cov, lower=True)
    except linalg.LinAlgError as exc:
        raise SingularCovariance(f"covariance is not positive definite: {exc}") from exc
    log_det = 2.0 * float(np.sum(np.log(np.diag(chol))))
    return chol, log_det


def mahalanobis_sq(X: np.ndarray, mean: np.ndarray, chol: np.ndarray) -> np.ndarray:
    z = linalg.solve_triangular(chol, (X - mean).T, lower=True)
    return np.sum(z * z, axis=0)


def gaussian_logpdf(X: np.ndarray, mean: np.ndarray, chol: np.ndarray, log_det: float) -> np.ndarray:
    dim = mean.shape[0]
    return -0.5 * (dim * LOG_2PI + log_det + mahalanobis_sq(X, mean, chol))


@dataclass
class GaussianModel(BaseDetector):
    mean: np.ndarray
    covariance: np.ndarray
    precision: np.ndarray
    log_det: float
    cholesky: np.ndarray

    family: ClassVar[ModelFamily] = ModelFamily.GAUSSIAN

    @property
    def n_features(self) -> int:
        return self.mean.shape[0]

    def _score_rows(self, X: np.ndarray) -> np.ndarray:
        return mahalanobis_sq(X, self.mean, self.cholesky)

    def neg_log_likelihood(self, X: np.ndarray) -> np.ndarray:
        X = self._check(np.atleast_2d(X))
        return -gaussian_logpdf(X, self.mean, self.cholesky, self.log_det)


def gaussian_from_moments(mean: np.ndarray, cov: np.ndarray) -> GaussianModel:
    cov = regularize_covariance(cov)
    chol, log_det = cholesky_factor(cov)
    precision = linalg.cho_solve((chol, True), np.eye(cov.shape[0]))
    return GaussianModel(
        mean=mean,
        covariance=cov,
        precision=0.5 * (precision + precision.T),
        log_det=log_det,
        cholesky=chol,
    )


def fit_gaussian(train: Dataset) -> GaussianModel:
    """Maximum-likelihood Gaussian (1/n covariance) of the training rows."""
    X = train.rows
    if X.shape[0] < 2:
        raise TooFewSamples(f"Gaussian fit needs at least 2 rows, got {X.shape[0]}")
    mean = X.mean(axis=0)
    centered = X - mean
    cov = centered.T @ centered / X.shape[0]
    model = gaussian_from_moments(mean, cov)
    logger.info(f"fitted Gaussian on {X.shape[0]} rows, D={X.shape[1]}, log|Sigma|={model.log_det:.4f}")
    return model
