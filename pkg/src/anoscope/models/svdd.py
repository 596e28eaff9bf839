"""Support vector data description: minimum enclosing hypersphere in feature space."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import ClassVar, List, Optional

import numpy as np

from src.anoscope.core.dimensions import ModelFamily
from src.anoscope.core.types import Dataset, Label
from src.anoscope.errors import InvalidNu, UnlabeledInput
from src.anoscope.kernels import KernelSpec, linear_kernel
from src.anoscope.models.base import BaseDetector
from src.anoscope.models.dual import KKT_TOLERANCE, MAX_ITERATIONS, solve_one_class_dual
from src.utils.logging import get_logger

logger = get_logger(__name__)

# alphas within this distance of 0 or C count as sitting on the bound
BOUND_TOLERANCE = 1e-7


def check_nu(nu: float) -> float:
    if not 0.0 < nu <= 1.0:
        raise InvalidNu(f"nu must lie in (0, 1], got {nu}")
    return float(nu)


def free_support_mask(alphas: np.ndarray, upper: float) -> np.ndarray:
    return (alphas > BOUND_TOLERANCE) & (alphas < upper - BOUND_TOLERANCE)


def boundary_offset(values: np.ndarray, alphas: np.ndarray, upper: float, outside_is_large: bool) -> float:
    """
    Mean of ``values`` over free support vectors. Without free support vectors,
    the midpoint of the interval allowed by the KKT conditions: points at
    alpha = 0 lie inside, points at alpha = C lie outside.
    """
    free = free_support_mask(alphas, upper)
    if np.any(free):
        return float(values[free].mean())

    at_zero = alphas <= BOUND_TOLERANCE
    at_upper = alphas >= upper - BOUND_TOLERANCE
    inside, outside = values[at_zero], values[at_upper]
    if outside_is_large:
        low = inside.max() if inside.size else None
        high = outside.min() if outside.size else None
    else:
        low = outside.max() if outside.size else None
        high = inside.min() if inside.size else None
    if low is None:
        return float(high)
    if high is None:
        return float(low)
    return 0.5 * (float(low) + float(high))


@dataclass
class SVDDModel(BaseDetector):
    """
    score(x) = k(x,x) - 2 sum_i a_i k(x, x_i) + sum_ij a_i a_j k_ij - R^2

    Negative inside the sphere. For the semi-supervised variant the expansion
    runs over training and labeled points and the coefficients are unconstrained.
    """

    training_points: np.ndarray
    alphas: np.ndarray
    kernel: KernelSpec
    radius2: float
    nu: float
    center_norm: float
    support_indices: np.ndarray
    semi_supervised: bool = False
    objective_history: List[float] = field(default_factory=list)

    family: ClassVar[ModelFamily] = ModelFamily.HYPERSPHERE
    has_intrinsic_boundary: ClassVar[bool] = True

    @property
    def n_features(self) -> int:
        return self.training_points.shape[1]

    def distance2(self, X: np.ndarray) -> np.ndarray:
        support = self.training_points[self.support_indices]
        cross = self.kernel(X, support) @ self.alphas[self.support_indices]
        return self.kernel.diag(X) - 2.0 * cross + self.center_norm

    def _score_rows(self, X: np.ndarray) -> np.ndarray:
        return self.distance2(X) - self.radius2


def fit_svdd(
    train: Dataset,
    kernel: Optional[KernelSpec] = None,
    nu: float = 0.1,
    tol: float = KKT_TOLERANCE,
    max_iter: int = MAX_ITERATIONS,
) -> SVDDModel:
    """
    Solve  max_a sum_i a_i k_ii - sum_ij a_i a_j k_ij  over 0 <= a_i <= 1/(nu n),
    sum_i a_i = 1. Without a kernel the sphere lives in input space.
    """
    nu = check_nu(nu)
    kernel = linear_kernel() if kernel is None else kernel
    X = train.rows
    n = X.shape[0]
    upper = 1.0 / (nu * n)

    K = kernel(X)
    solution = solve_one_class_dual(K, -0.5 * np.diag(K), upper, tol=tol, max_iter=max_iter)
    alphas = solution.alphas
    center_norm = float(alphas @ K @ alphas)
    distances = np.diag(K) - 2.0 * (K @ alphas) + center_norm
    radius2 = max(boundary_offset(distances, alphas, upper, outside_is_large=True), 0.0)

    support = np.flatnonzero(alphas > 0)
    logger.info(
        f"fitted SVDD ({kernel.describe()}, nu={nu}) on {n} rows: {support.size} support vectors, "
        f"R^2={radius2:.6g}, {solution.iterations} SMO steps"
    )
    return SVDDModel(
        training_points=X.copy(),
        alphas=alphas,
        kernel=kernel,
        radius2=radius2,
        nu=nu,
        center_norm=center_norm,
        support_indices=support,
    )


def fit_semi_supervised_svdd(
    train: Dataset,
    labeled: Dataset,
    kernel: Optional[KernelSpec] = None,
    nu: float = 0.1,
    kappa: float = 1.0,
    learning_rate: float = 0.05,
    epochs: int = 500,
) -> SVDDModel:
    """
    Minimize  R^2 + 1/(nu n) sum_i max(0, s_i) + kappa/(nu m) sum_j max(0, y_j s_j)
    by full-batch subgradient descent over the kernel expansion and R^2,
    warm-started from the unsupervised dual solution. The best iterate is kept.
    """
    nu = check_nu(nu)
    kernel = linear_kernel() if kernel is None else kernel
    known = labeled.labels != int(Label.UNLABELED)
    if not np.any(known):
        raise UnlabeledInput("semi-supervised SVDD needs labeled points")
    labeled_rows = labeled.rows[known]
    y = labeled.labels[known].astype(np.float64)

    base = fit_svdd(train, kernel, nu)
    n, m = train.n, labeled_rows.shape[0]
    Z = np.vstack([train.rows, labeled_rows])
    K = kernel(Z)
    K_diag = np.diag(K)

    beta = np.concatenate([base.alphas, np.zeros(m)])
    radius2 = base.radius2
    unlabeled_weight = 1.0 / (nu * n)
    labeled_weight = kappa / (nu * m)
    sign = np.concatenate([np.ones(n), y])
    weight = np.concatenate([np.full(n, unlabeled_weight), np.full(m, labeled_weight)])

    def objective(beta: np.ndarray, radius2: float):
        Kb = K @ beta
        slack = K_diag - 2.0 * Kb + beta @ Kb - radius2
        return radius2 + float(np.sum(weight * np.maximum(0.0, sign * slack))), Kb, slack

    best_value, Kb, slack = objective(beta, radius2)
    best_beta, best_radius2 = beta.copy(), radius2
    history = [best_value]
    for epoch in range(epochs):
        active = weight * sign * (sign * slack > 0)
        grad_radius2 = 1.0 - float(np.sum(active))
        grad_beta = 2.0 * (np.sum(active) * Kb - K @ active)
        step = learning_rate / np.sqrt(1.0 + epoch)
        beta = beta - step * grad_beta
        radius2 = max(radius2 - step * grad_radius2, 0.0)

        value, Kb, slack = objective(beta, radius2)
        history.append(value)
        if value < best_value:
            best_value, best_beta, best_radius2 = value, beta.copy(), radius2
    logger.info(
        f"fitted semi-supervised SVDD on {n} unlabeled + {m} labeled rows: objective "
        f"{history[0]:.6g} -> {best_value:.6g}"
    )

    support = np.flatnonzero(best_beta != 0)
    return SVDDModel(
        training_points=Z,
        alphas=best_beta,
        kernel=kernel,
        radius2=best_radius2,
        nu=nu,
        center_norm=float(best_beta @ K @ best_beta),
        support_indices=support,
        semi_supervised=True,
        objective_history=history,
    )
