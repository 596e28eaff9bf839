"""Rewriting a KDE detector as a distance layer followed by soft-min pooling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp, softmax

from src.anoscope.kernels import KernelSpec
from src.anoscope.models.kde import KDEModel


@dataclass
class NeuralizedKDE:
    """
    h_j(x) = gamma * dist^2(x, x_j) + log n      (distance layer)
    s(x)   = smin_j h_j = -log sum_j exp(-h_j)   (pooling layer)
    """

    training_points: np.ndarray
    kernel: KernelSpec

    @property
    def gamma(self) -> float:
        return self.kernel.gamma

    @property
    def log_n(self) -> float:
        return float(np.log(self.training_points.shape[0]))

    def distance_layer(self, X: np.ndarray) -> np.ndarray:
        return self.gamma * self.kernel.sqdist(X, self.training_points) + self.log_n

    @staticmethod
    def pool(h: np.ndarray) -> np.ndarray:
        return -logsumexp(-h, axis=1)

    @staticmethod
    def pooling_weights(h: np.ndarray) -> np.ndarray:
        """Share of each training point in the soft minimum (rows sum to one)."""
        return softmax(-h, axis=1)

    def __call__(self, X: np.ndarray) -> np.ndarray:
        return self.pool(self.distance_layer(np.atleast_2d(np.asarray(X, dtype=np.float64))))


def neuralize_kde(model: KDEModel) -> NeuralizedKDE:
    return NeuralizedKDE(training_points=model.training_points, kernel=model.kernel)
