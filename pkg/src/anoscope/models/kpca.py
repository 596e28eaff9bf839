"""Kernel PCA detector: reconstruction error of the centered feature map."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import ClassVar, Optional

import numpy as np

from src.anoscope.core.dimensions import ModelFamily
from src.anoscope.core.types import Dataset
from src.anoscope.errors import InvalidConfig, NonPSDKernelMatrix, TooFewSamples
from src.anoscope.kernels import KernelSpec, median_heuristic_gamma, nearest_half_mass_share, rbf_kernel
from src.anoscope.models.base import BaseDetector
from src.anoscope.models.pca import components_for_fraction
from src.utils.logging import get_logger

logger = get_logger(__name__)

DIAGONAL_JITTER = 1e-10
NEGATIVE_EIGEN_TOLERANCE = 1e-8
POSITIVE_EIGEN_TOLERANCE = 1e-12


@dataclass
class KPCAModel(BaseDetector):
    """
    score(x) = ||phi~(x)||^2 - sum_j <phi~(x), v_j>^2

    phi~ is the feature map centered on the training mean; v_j = sum_i A_ij phi~(x_i)
    are unit-norm principal axes, so columns of A are eigenvectors scaled by
    1/sqrt(lambda_j). Kernel row means and the grand mean are kept for centering
    new points.
    """

    training_points: np.ndarray
    kernel: KernelSpec
    alphas: np.ndarray
    eigvals: np.ndarray
    row_means: np.ndarray
    grand_mean: float
    variance_fraction: float

    family: ClassVar[ModelFamily] = ModelFamily.SUBSPACE

    @property
    def n_features(self) -> int:
        return self.training_points.shape[1]

    @property
    def n_components(self) -> int:
        return self.alphas.shape[1]

    def _score_rows(self, X: np.ndarray) -> np.ndarray:
        cross = self.kernel(X, self.training_points)
        cross_means = cross.mean(axis=1)
        self_centered = self.kernel.diag(X) - 2.0 * cross_means + self.grand_mean
        cross_centered = cross - cross_means[:, None] - self.row_means[None, :] + self.grand_mean
        projections = cross_centered @ self.alphas
        return np.clip(self_centered - np.sum(projections**2, axis=1), 0.0, None)


def neighbor_similarity_gamma(train: Dataset) -> float:
    """Kernel width at which the median neighbour pair has similarity 1/2."""
    return median_heuristic_gamma(train.rows)


def _centered_spectrum(K: np.ndarray):
    n = K.shape[0]
    row_means = K.mean(axis=0)
    grand_mean = float(K.mean())
    centered = K - row_means[None, :] - row_means[:, None] + grand_mean
    centered = 0.5 * (centered + centered.T)

    eigvals, eigvecs = np.linalg.eigh(centered)
    scale = max(float(np.max(np.abs(eigvals))), 1.0)
    if eigvals[0] < -NEGATIVE_EIGEN_TOLERANCE * scale:
        logger.warning(f"centered kernel matrix has eigenvalue {eigvals[0]:.3e}, retrying with jitter")
        eigvals, eigvecs = np.linalg.eigh(centered + DIAGONAL_JITTER * scale * np.eye(n))
        if eigvals[0] < -NEGATIVE_EIGEN_TOLERANCE * scale:
            raise NonPSDKernelMatrix(f"kernel matrix is not PSD (min eigenvalue {eigvals[0]:.3e})")
    return eigvals[::-1], eigvecs[:, ::-1], row_means, grand_mean


def fit_kpca(
    train: Dataset,
    kernel: Optional[KernelSpec] = None,
    variance_fraction: float = 0.9,
    n_components: Optional[int] = None,
) -> KPCAModel:
    """Eigendecompose the double-centered kernel matrix and keep the leading axes."""
    X = train.rows
    n = X.shape[0]
    if n < 2:
        raise TooFewSamples(f"kernel PCA needs at least 2 rows, got {n}")
    if not 0.0 < variance_fraction <= 1.0:
        raise InvalidConfig(f"variance_fraction must lie in (0, 1], got {variance_fraction}")
    if kernel is None:
        kernel = rbf_kernel(neighbor_similarity_gamma(train))
        if n >= 3 and logger.isEnabledFor(logging.DEBUG):
            share = nearest_half_mass_share(X, kernel.gamma)
            logger.debug(
                f"kPCA width gamma={kernel.gamma:.6g}: nearest half of neighbours hold {share:.3f} of the similarity mass"
            )

    eigvals, eigvecs, row_means, grand_mean = _centered_spectrum(kernel(X))
    positive = int(np.sum(eigvals > POSITIVE_EIGEN_TOLERANCE * max(float(eigvals[0]), 1e-300)))
    if positive == 0:
        raise NonPSDKernelMatrix("centered kernel matrix has no positive eigenvalue")

    if n_components is None:
        d = components_for_fraction(np.clip(eigvals[:positive], 0.0, None), variance_fraction)
    elif n_components >= 1:
        d = int(n_components)
    else:
        raise InvalidConfig(f"n_components must be >= 1, got {n_components}")
    d = min(d, positive)

    alphas = eigvecs[:, :d] / np.sqrt(eigvals[:d])[None, :]
    logger.info(f"fitted kernel PCA ({kernel.describe()}) on {n} rows keeping d={d} of {positive} axes")
    return KPCAModel(
        training_points=X.copy(),
        kernel=kernel,
        alphas=alphas,
        eigvals=eigvals[:d].copy(),
        row_means=row_means,
        grand_mean=grand_mean,
        variance_fraction=float(variance_fraction),
    )


def kpca_score(model: KPCAModel, x) -> float:
    """Feature-space reconstruction error of a single point."""
    return model.score(x)
