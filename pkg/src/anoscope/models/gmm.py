"""Gaussian mixture detector fitted with expectation maximization."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import ClassVar, List

import numpy as np
from scipy.special import logsumexp

from src.anoscope.core.dimensions import ModelFamily
from src.anoscope.core.types import Dataset
from src.anoscope.errors import DegenerateComponent, InvalidConfig, TooFewSamples
from src.anoscope.models.base import BaseDetector
from src.anoscope.models.gaussian import cholesky_factor, gaussian_logpdf, mahalanobis_sq, regularize_covariance
from src.anoscope.models.vq import kmeanspp_seeds
from src.utils.logging import get_logger

logger = get_logger(__name__)

# absolute covariance floor, relative to the average per-feature data variance
COMPONENT_FLOOR_SCALE = 1e-6


class GMMScoring(str, Enum):
    NEG_LOG_LIKELIHOOD = "nll"
    PROTOTYPE = "prototype"


@dataclass
class GMMModel(BaseDetector):
    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    choleskys: np.ndarray
    log_dets: np.ndarray
    scoring: GMMScoring = GMMScoring.NEG_LOG_LIKELIHOOD
    log_likelihood_history: List[float] = field(default_factory=list)

    family: ClassVar[ModelFamily] = ModelFamily.GMM

    @property
    def n_features(self) -> int:
        return self.means.shape[1]

    @property
    def k(self) -> int:
        return self.weights.shape[0]

    def component_log_prob(self, X: np.ndarray) -> np.ndarray:
        """(m, K) matrix of log pi_k + log N(x; mu_k, Sigma_k)."""
        return np.column_stack(
            [
                np.log(self.weights[j]) + gaussian_logpdf(X, self.means[j], self.choleskys[j], self.log_dets[j])
                for j in range(self.k)
            ]
        )

    def _score_rows(self, X: np.ndarray) -> np.ndarray:
        if self.scoring == GMMScoring.PROTOTYPE:
            return np.column_stack(
                [mahalanobis_sq(X, self.means[j], self.choleskys[j]) for j in range(self.k)]
            ).min(axis=1)
        return -logsumexp(self.component_log_prob(X), axis=1)


def _m_step(X: np.ndarray, resp: np.ndarray, floor: float):
    n, dim = X.shape
    counts = resp.sum(axis=0)
    if np.any(counts <= 1e-12 * n):
        raise DegenerateComponent(f"mixture component lost all responsibility (counts {counts})")
    weights = counts / n
    weights = weights / weights.sum()
    means = (resp.T @ X) / counts[:, None]

    covariances = np.empty((resp.shape[1], dim, dim))
    choleskys = np.empty_like(covariances)
    log_dets = np.empty(resp.shape[1])
    for j in range(resp.shape[1]):
        diff = X - means[j]
        cov = (resp[:, j, None] * diff).T @ diff / counts[j]
        if np.trace(cov) <= floor * dim:
            logger.warning(f"component {j} collapsed onto a point, applying covariance floor {floor:.3e}")
            cov = cov + floor * np.eye(dim)
        covariances[j] = regularize_covariance(cov)
        choleskys[j], log_dets[j] = cholesky_factor(covariances[j])
    return weights, means, covariances, choleskys, log_dets


def fit_gmm(
    train: Dataset,
    k: int,
    seed: int = 0,
    max_iter: int = 200,
    tol: float = 1e-8,
    scoring: GMMScoring = GMMScoring.NEG_LOG_LIKELIHOOD,
) -> GMMModel:
    """
    EM from k-means++ seeded means, stopping once the mean log-likelihood gain
    drops below ``tol`` or after ``max_iter`` iterations.
    """
    X = train.rows
    n, dim = X.shape
    if k < 1:
        raise InvalidConfig(f"K must be >= 1, got {k}")
    if n < max(k, 2):
        raise TooFewSamples(f"GMM with K={k} needs at least {max(k, 2)} rows, got {n}")

    rng = np.random.default_rng(seed)
    centered = X - X.mean(axis=0)
    data_cov = centered.T @ centered / n
    floor = max(COMPONENT_FLOOR_SCALE * float(np.trace(data_cov)) / dim, np.finfo(float).tiny)

    start_cov = regularize_covariance(data_cov + floor * np.eye(dim))
    start_chol, start_log_det = cholesky_factor(start_cov)
    model = GMMModel(
        weights=np.full(k, 1.0 / k),
        means=kmeanspp_seeds(X, k, rng),
        covariances=np.repeat(start_cov[None], k, axis=0),
        choleskys=np.repeat(start_chol[None], k, axis=0),
        log_dets=np.full(k, start_log_det),
        scoring=GMMScoring(scoring),
    )

    history: List[float] = []
    converged = False
    for iteration in range(max_iter):
        log_prob = model.component_log_prob(X)
        log_norm = logsumexp(log_prob, axis=1)
        history.append(float(log_norm.mean()))
        logger.debug(f"EM iteration {iteration}: mean log-likelihood {history[-1]:.10f}")
        if len(history) > 1 and history[-1] - history[-2] < tol:
            converged = True
            break
        resp = np.exp(log_prob - log_norm[:, None])
        (
            model.weights,
            model.means,
            model.covariances,
            model.choleskys,
            model.log_dets,
        ) = _m_step(X, resp, floor)

    if not converged:
        history.append(float(logsumexp(model.component_log_prob(X), axis=1).mean()))
        logger.warning(f"EM stopped at max_iter={max_iter} before reaching tol={tol}")

    model.log_likelihood_history = history
    logger.info(f"fitted GMM with K={k} on {n} rows in {len(history)} EM steps, mean log-lik {history[-1]:.6f}")
    return model
