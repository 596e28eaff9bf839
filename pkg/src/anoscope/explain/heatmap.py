"""Taylor-type relevance heatmaps of KDE anomaly scores."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import List, Sequence

import numpy as np
from scipy.special import logsumexp

from src.anoscope.errors import DimensionMismatch
from src.anoscope.explain.neuralize import neuralize_kde
from src.anoscope.kernels import KernelKind
from src.anoscope.models.kde import KDEModel

FD_STEP = 1e-5


class GradientMode(str, Enum):
    ANALYTIC = "analytic"
    FINITE_DIFFERENCE = "finite_difference"


class GradientTarget(str, Enum):
    TRAINING_POINTS = "training_points"
    PROBE = "probe"


@dataclass
class Heatmap:
    relevance: np.ndarray
    score: float

    def __post_init__(self) -> None:
        self.relevance = np.asarray(self.relevance, dtype=np.float64)
        if not np.all(np.isfinite(self.relevance)):
            raise ValueError("heatmap relevance must be finite")


def _metric(model: KDEModel) -> np.ndarray:
    if model.kernel.kind == KernelKind.MAHALANOBIS and model.kernel.metric is not None:
        return model.kernel.metric
    return np.eye(model.n_features)


def _log_terms(model: KDEModel, x: np.ndarray, points: np.ndarray) -> np.ndarray:
    return -model.gamma * model.kernel.sqdist(x[None, :], points)[0]


def _score_from_terms(terms: np.ndarray, n: int) -> float:
    return float(-logsumexp(terms) + np.log(n))


def training_point_gradients(model: KDEModel, x: np.ndarray, mode: GradientMode = GradientMode.ANALYTIC) -> np.ndarray:
    """(n, D) matrix whose row j is the gradient of s(x) with respect to x_j."""
    points = model.training_points
    diff = points - x
    if mode == GradientMode.ANALYTIC:
        terms = _log_terms(model, x, points)
        weights = np.exp(terms - logsumexp(terms))
        return 2.0 * model.gamma * weights[:, None] * (diff @ _metric(model))

    # central differences; moving x_j only changes term j of the sum
    n, dim = points.shape
    terms = _log_terms(model, x, points)
    grads = np.empty((n, dim))
    for j in range(n):
        for d in range(dim):
            shifted = []
            for sign in (1.0, -1.0):
                moved = points[j].copy()
                moved[d] += sign * FD_STEP
                perturbed = terms.copy()
                perturbed[j] = _log_terms(model, x, moved[None, :])[0]
                shifted.append(_score_from_terms(perturbed, n))
            grads[j, d] = (shifted[0] - shifted[1]) / (2.0 * FD_STEP)
    return grads


def probe_term_gradients(model: KDEModel, x: np.ndarray, mode: GradientMode = GradientMode.ANALYTIC) -> np.ndarray:
    """
    (n, D) matrix whose row j is p_j(x) * grad_x h_j(x): the contribution of
    training point j to the gradient of s with respect to the probe.
    """
    net = neuralize_kde(model)
    h = net.distance_layer(x[None, :])
    weights = net.pooling_weights(h)[0]
    if mode == GradientMode.ANALYTIC:
        return 2.0 * model.gamma * weights[:, None] * ((x - model.training_points) @ _metric(model))

    dim = x.shape[0]
    grads = np.empty((model.n, dim))
    for d in range(dim):
        step = np.zeros(dim)
        step[d] = FD_STEP
        upper = net.distance_layer((x + step)[None, :])[0]
        lower = net.distance_layer((x - step)[None, :])[0]
        grads[:, d] = weights * (upper - lower) / (2.0 * FD_STEP)
    return grads


def lrp_heatmap(
    model: KDEModel,
    x: Sequence[float],
    gradient: GradientMode = GradientMode.ANALYTIC,
    wrt: GradientTarget = GradientTarget.TRAINING_POINTS,
) -> Heatmap:
    """
    R = 1/2 sum_j (x_j - x) * grad_{x_j} s(x)

    With ``wrt="probe"`` the root point of each term is the training point and
    the expansion uses the per-term probe gradient: R = 1/2 sum_j (x - x_j) *
    p_j grad_x h_j(x). Both readings give gamma sum_j p_j (x_j - x) * M (x_j - x)
    for the quadratic distance layer, which is componentwise >= 0 for RBF kernels.
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != model.n_features:
        raise DimensionMismatch(f"model has {model.n_features} features, probe has {x.shape[0]}")
    gradient, wrt = GradientMode(gradient), GradientTarget(wrt)

    if wrt == GradientTarget.TRAINING_POINTS:
        grads = training_point_gradients(model, x, gradient)
        relevance = 0.5 * np.sum((model.training_points - x) * grads, axis=0)
    else:
        grads = probe_term_gradients(model, x, gradient)
        relevance = 0.5 * np.sum((x - model.training_points) * grads, axis=0)
    return Heatmap(relevance=relevance, score=model.score(x))


def heatmap_batch(model: KDEModel, X: np.ndarray, **options) -> List[Heatmap]:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    return [lrp_heatmap(model, x, **options) for x in X]
