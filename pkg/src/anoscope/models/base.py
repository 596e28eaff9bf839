from __future__ import annotations

from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from typing import ClassVar, Optional, Union

import numpy as np

from src.anoscope.core.dimensions import ModelFamily
from src.anoscope.core.types import Dataset, ScoreVector
from src.anoscope.errors import DimensionMismatch, ModelHasNoIntrinsicBoundary
from src.utils.env import read_thread_cap
from src.utils.logging import get_logger

logger = get_logger(__name__)

# below this many rows a batch is scored in one piece
MIN_ROWS_PER_CHUNK = 256


def as_matrix(data: Union[Dataset, np.ndarray]) -> np.ndarray:
    if isinstance(data, Dataset):
        return data.rows
    X = np.asarray(data, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    return X


class BaseDetector(ABC):
    """
    Common contract of every fitted detector.

    Scores follow one orientation across all families: larger = more anomalous.
    Models with an intrinsic boundary additionally expose ``decision_function``,
    negative inside the estimated level set.
    """

    family: ClassVar[ModelFamily]
    has_intrinsic_boundary: ClassVar[bool] = False

    @property
    @abstractmethod
    def n_features(self) -> int:
        pass

    @abstractmethod
    def _score_rows(self, X: np.ndarray) -> np.ndarray:
        """Score a validated (m, D) matrix."""

    def _check(self, X: np.ndarray) -> np.ndarray:
        if X.shape[1] != self.n_features:
            raise DimensionMismatch(
                f"{type(self).__name__} was fitted on {self.n_features} features, got {X.shape[1]}"
            )
        return X

    def score_batch(self, data: Union[Dataset, np.ndarray], threads: Optional[int] = None) -> np.ndarray:
        X = self._check(as_matrix(data))
        threads = read_thread_cap() if threads is None else max(1, int(threads))
        if threads == 1 or X.shape[0] < 2 * MIN_ROWS_PER_CHUNK:
            return self._score_rows(X)

        chunks = np.array_split(X, min(threads, X.shape[0] // MIN_ROWS_PER_CHUNK))
        with ThreadPoolExecutor(max_workers=threads) as executor:
            parts = list(executor.map(self._score_rows, chunks))
        return np.concatenate(parts)

    def score(self, x: np.ndarray) -> float:
        return float(self.score_batch(np.atleast_2d(np.asarray(x, dtype=np.float64)), threads=1)[0])

    def score_vector(self, data: Union[Dataset, np.ndarray]) -> ScoreVector:
        return ScoreVector(self.score_batch(data))

    def decision_function(self, data: Union[Dataset, np.ndarray]) -> np.ndarray:
        if not self.has_intrinsic_boundary:
            raise ModelHasNoIntrinsicBoundary(
                f"{type(self).__name__} has no intrinsic decision boundary; use calibrate_threshold"
            )
        return self.score_batch(data)
