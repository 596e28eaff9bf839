"""Robust feature scaling with training-set medians and interquartile ranges."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.anoscope.core.types import Dataset
from src.anoscope.errors import DimensionMismatch, EmptyTrainingSet
from src.utils.logging import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class RobustScaler:
    medians: np.ndarray
    iqrs: np.ndarray

    @property
    def zero_iqr(self) -> np.ndarray:
        return self.iqrs <= 0

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != self.medians.shape[0]:
            raise DimensionMismatch(f"scaler fitted on {self.medians.shape[0]} features, got {X.shape[-1]}")
        # zero-IQR columns are centered only
        divisor = np.where(self.zero_iqr, 1.0, self.iqrs)
        return (X - self.medians) / divisor


def fit_robust_scaler(train: Optional[Dataset]) -> RobustScaler:
    """Column medians and IQRs (linear-interpolation quantiles) of the training rows."""
    if train is None or train.n == 0:
        raise EmptyTrainingSet("robust scaler needs training rows")
    q25, medians, q75 = np.quantile(train.rows, [0.25, 0.5, 0.75], axis=0, method="linear")
    iqrs = q75 - q25
    scaler = RobustScaler(medians=medians, iqrs=iqrs)
    if np.any(scaler.zero_iqr):
        logger.warning(f"features {np.flatnonzero(scaler.zero_iqr).tolist()} have zero IQR; centering only")
    return scaler


def apply_scaler(scaler: RobustScaler, data: Optional[Dataset]) -> Optional[Dataset]:
    if data is None:
        return None
    return data.with_rows(scaler.transform(data.rows))
