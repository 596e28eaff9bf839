"""Probabilistic PCA detector (closed-form maximum likelihood)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from src.anoscope.core.dimensions import ModelFamily
from src.anoscope.core.types import Dataset
from src.anoscope.errors import InvalidConfig, RankDeficient, TooFewSamples
from src.anoscope.models.base import BaseDetector
from src.anoscope.models.gaussian import JITTER_SCALE, cholesky_factor, gaussian_logpdf
from src.utils.logging import get_logger

logger = get_logger(__name__)


@dataclass
class PPCAModel(BaseDetector):
    """
    N(mean, W^T W + sigma2 I) with loadings W stored as a d x D matrix.
    score(x) is the negative log-likelihood.
    """

    mean: np.ndarray
    W: np.ndarray
    sigma2: float
    covariance: np.ndarray
    cholesky: np.ndarray
    log_det: float

    family: ClassVar[ModelFamily] = ModelFamily.PPCA

    @property
    def n_features(self) -> int:
        return self.mean.shape[0]

    @property
    def latent_dim(self) -> int:
        return self.W.shape[0]

    def _score_rows(self, X: np.ndarray) -> np.ndarray:
        return -gaussian_logpdf(X, self.mean, self.cholesky, self.log_det)


def fit_ppca(train: Dataset, d: int) -> PPCAModel:
    X = train.rows
    n, dim = X.shape
    if n < 2:
        raise TooFewSamples(f"pPCA needs at least 2 rows, got {n}")
    if not 1 <= d < dim:
        raise InvalidConfig(f"pPCA latent dimension must satisfy 1 <= d < D={dim}, got {d}")

    mean = X.mean(axis=0)
    centered = X - mean
    cov = centered.T @ centered / n
    eigvals, eigvecs = np.linalg.eigh(0.5 * (cov + cov.T))
    eigvals, eigvecs = eigvals[::-1], eigvecs[:, ::-1]

    if eigvals[d - 1] <= 0:
        raise RankDeficient(f"covariance has fewer than d={d} positive eigenvalues")
    sigma2 = float(np.mean(eigvals[d:]))
    floor = JITTER_SCALE * float(np.sum(eigvals)) / dim
    if sigma2 < floor:
        logger.warning(f"pPCA residual variance {sigma2:.3e} below floor, using {floor:.3e}")
        sigma2 = floor
    if eigvals[d - 1] < sigma2:
        raise RankDeficient(f"top-{d} eigenvalues do not dominate the residual variance {sigma2:.3e}")

    W = np.sqrt(eigvals[:d] - sigma2)[:, None] * eigvecs[:, :d].T
    model_cov = W.T @ W + sigma2 * np.eye(dim)
    chol, log_det = cholesky_factor(model_cov)
    logger.info(f"fitted pPCA with d={d} of D={dim}, sigma2={sigma2:.6g}")
    return PPCAModel(mean=mean, W=W, sigma2=sigma2, covariance=model_cov, cholesky=chol, log_det=log_det)
