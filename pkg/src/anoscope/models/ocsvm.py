"""One-class SVM: maximum-margin hyperplane separating the data from the origin."""

from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from src.anoscope.core.dimensions import ModelFamily
from src.anoscope.core.types import Dataset
from src.anoscope.kernels import KernelSpec
from src.anoscope.models.base import BaseDetector
from src.anoscope.models.dual import KKT_TOLERANCE, MAX_ITERATIONS, solve_one_class_dual
from src.anoscope.models.svdd import boundary_offset, check_nu
from src.utils.logging import get_logger

logger = get_logger(__name__)


@dataclass
class OCSVMModel(BaseDetector):
    """score(x) = rho - sum_i a_i k(x, x_i); positive outside the estimated level set."""

    training_points: np.ndarray
    alphas: np.ndarray
    kernel: KernelSpec
    rho: float
    nu: float
    support_indices: np.ndarray

    family: ClassVar[ModelFamily] = ModelFamily.HYPERPLANE
    has_intrinsic_boundary: ClassVar[bool] = True

    @property
    def n_features(self) -> int:
        return self.training_points.shape[1]

    def _score_rows(self, X: np.ndarray) -> np.ndarray:
        support = self.training_points[self.support_indices]
        return self.rho - self.kernel(X, support) @ self.alphas[self.support_indices]


def fit_ocsvm(
    train: Dataset,
    kernel: KernelSpec,
    nu: float = 0.1,
    tol: float = KKT_TOLERANCE,
    max_iter: int = MAX_ITERATIONS,
) -> OCSVMModel:
    nu = check_nu(nu)
    X = train.rows
    n = X.shape[0]
    upper = 1.0 / (nu * n)

    K = kernel(X)
    solution = solve_one_class_dual(K, np.zeros(n), upper, tol=tol, max_iter=max_iter)
    alphas = solution.alphas
    # decision value f(x_i) = (K a)_i; margin support vectors sit at f = rho
    rho = boundary_offset(K @ alphas, alphas, upper, outside_is_large=False)

    support = np.flatnonzero(alphas > 0)
    logger.info(
        f"fitted OC-SVM ({kernel.describe()}, nu={nu}) on {n} rows: {support.size} support vectors, "
        f"rho={rho:.6g}, {solution.iterations} SMO steps"
    )
    return OCSVMModel(
        training_points=X.copy(),
        alphas=alphas,
        kernel=kernel,
        rho=rho,
        nu=nu,
        support_indices=support,
    )
