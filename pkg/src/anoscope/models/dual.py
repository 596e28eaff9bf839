"""
Pairwise (SMO) solver for the one-class dual

    min_a  1/2 a^T K a + c^T a
    s.t.   0 <= a_i <= C,  sum_i a_i = 1

shared by SVDD (c = -diag(K)/2) and the one-class SVM (c = 0). Each step moves
mass between two coordinates picked with second-order working-set selection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from src.anoscope.errors import SolverNotConverged
from src.utils.logging import get_logger

logger = get_logger(__name__)

KKT_TOLERANCE = 1e-6
MAX_ITERATIONS = 100_000
DIAGONAL_JITTER = 1e-10
# smallest curvature used along a working-set direction
MIN_CURVATURE = 1e-12


@dataclass
class DualSolution:
    alphas: np.ndarray
    gradient: np.ndarray
    iterations: int
    violation: float
    objective: float


def initial_alphas(n: int, upper: float) -> np.ndarray:
    """Fill coordinates with ``upper`` in index order until the simplex is met."""
    alphas = np.zeros(n)
    remaining = 1.0
    for i in range(n):
        step = min(upper, remaining)
        alphas[i] = step
        remaining -= step
        if remaining <= 0:
            break
    return alphas


def dual_objective(K: np.ndarray, linear: np.ndarray, alphas: np.ndarray) -> float:
    return float(0.5 * alphas @ K @ alphas + linear @ alphas)


def solve_one_class_dual(
    K: np.ndarray,
    linear: np.ndarray,
    upper: float,
    tol: float = KKT_TOLERANCE,
    max_iter: int = MAX_ITERATIONS,
) -> DualSolution:
    n = K.shape[0]
    if upper * n < 1.0 - 1e-12:
        raise ValueError(f"box bound {upper} cannot reach the simplex with n={n}")
    Q = K + DIAGONAL_JITTER * np.eye(n)
    diag = np.diag(Q)

    alphas = initial_alphas(n, upper)
    gradient = Q @ alphas + linear
    bound_slack = 1e-12 * max(upper, 1.0)

    violation = np.inf
    iteration = 0
    while iteration < max_iter:
        can_grow = alphas < upper - bound_slack
        can_shrink = alphas > bound_slack
        if not np.any(can_grow) or not np.any(can_shrink):
            violation = 0.0
            break

        grow_gradient = np.where(can_grow, gradient, np.inf)
        i = int(np.argmin(grow_gradient))
        g_min = grow_gradient[i]
        g_max = float(np.max(np.where(can_shrink, gradient, -np.inf)))
        violation = g_max - g_min
        if violation < tol:
            break

        gain = np.where(can_shrink, gradient - g_min, 0.0)
        curvature = np.maximum(diag[i] + diag - 2.0 * Q[i], MIN_CURVATURE)
        candidate = np.where(gain > 0, gain * gain / curvature, -np.inf)
        j = int(np.argmax(candidate))

        step = min(gain[j] / curvature[j], upper - alphas[i], alphas[j])
        alphas[i] += step
        alphas[j] -= step
        gradient += step * (Q[:, i] - Q[:, j])
        iteration += 1
    else:
        raise SolverNotConverged(iteration, float(violation))

    alphas = np.clip(alphas, 0.0, upper)
    logger.debug(f"SMO finished after {iteration} iterations, KKT violation {violation:.3e}")
    return DualSolution(
        alphas=alphas,
        gradient=gradient,
        iterations=iteration,
        violation=float(violation),
        objective=dual_objective(K, linear, alphas),
    )
