"""Principal component analysis detector scoring by reconstruction error."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import ClassVar, Optional

import numpy as np

from src.anoscope.core.dimensions import ModelFamily
from src.anoscope.core.types import Dataset
from src.anoscope.errors import InvalidConfig, TooFewSamples
from src.anoscope.models.base import BaseDetector
from src.utils.logging import get_logger

logger = get_logger(__name__)

# relative slack when comparing cumulative variance against the target fraction
FRACTION_TOLERANCE = 1e-12


class PCASolver(str, Enum):
    EIGH = "eigh"  # maximize retained variance via the covariance spectrum
    SVD = "svd"  # minimize projection error via the centered data matrix


@dataclass
class PCAModel(BaseDetector):
    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray
    variance_fraction: float

    family: ClassVar[ModelFamily] = ModelFamily.SUBSPACE

    @property
    def n_features(self) -> int:
        return self.mean.shape[0]

    @property
    def n_components(self) -> int:
        return self.components.shape[0]

    def projector(self) -> np.ndarray:
        return self.components.T @ self.components

    def _score_rows(self, X: np.ndarray) -> np.ndarray:
        centered = X - self.mean
        residual = centered - (centered @ self.components.T) @ self.components
        return np.einsum("ij,ij->i", residual, residual)


def components_for_fraction(spectrum: np.ndarray, variance_fraction: float) -> int:
    """Smallest d whose leading eigenvalues reach ``variance_fraction`` of the total."""
    total = float(np.sum(spectrum))
    if total <= 0:
        return 1
    cumulative = np.cumsum(spectrum) / total
    target = variance_fraction * (1.0 - FRACTION_TOLERANCE)
    return int(np.searchsorted(cumulative, target) + 1)


def fit_pca(
    train: Dataset,
    variance_fraction: float = 0.9,
    solver: PCASolver = PCASolver.EIGH,
    n_components: Optional[int] = None,
) -> PCAModel:
    """Keep the fewest components reaching ``variance_fraction``, or exactly ``n_components`` when given."""
    X = train.rows
    n, dim = X.shape
    if n < 2:
        raise TooFewSamples(f"PCA needs at least 2 rows, got {n}")
    if not 0.0 < variance_fraction <= 1.0:
        raise InvalidConfig(f"variance_fraction must lie in (0, 1], got {variance_fraction}")

    mean = X.mean(axis=0)
    centered = X - mean
    if PCASolver(solver) == PCASolver.SVD:
        _, singular, vt = np.linalg.svd(centered, full_matrices=False)
        spectrum, directions = singular**2 / n, vt
    else:
        cov = centered.T @ centered / n
        eigvals, eigvecs = np.linalg.eigh(0.5 * (cov + cov.T))
        spectrum, directions = np.clip(eigvals[::-1], 0.0, None), eigvecs[:, ::-1].T

    if n_components is None:
        d = components_for_fraction(spectrum, variance_fraction)
    elif 1 <= n_components <= dim:
        d = int(n_components)
    else:
        raise InvalidConfig(f"n_components must lie in [1, {dim}], got {n_components}")
    d = min(d, directions.shape[0])
    logger.info(f"fitted PCA keeping d={d} of D={dim} components ({variance_fraction:.0%} variance target)")
    return PCAModel(
        mean=mean,
        components=np.ascontiguousarray(directions[:d]),
        explained_variance=spectrum[:d].copy(),
        variance_fraction=float(variance_fraction),
    )
