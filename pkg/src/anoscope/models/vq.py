"""Vector quantization (k-means / k-medians) detectors."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import ClassVar, List, Optional

import numpy as np
from scipy.spatial.distance import cdist

from src.anoscope.core.dimensions import ModelFamily
from src.anoscope.core.types import Dataset
from src.anoscope.errors import EmptyCluster, InvalidConfig, TooFewSamples
from src.anoscope.models.base import BaseDetector
from src.utils.logging import get_logger

logger = get_logger(__name__)


class VQNorm(str, Enum):
    L2 = "l2"
    L1 = "l1"


def _distances(X: np.ndarray, prototypes: np.ndarray, norm: VQNorm) -> np.ndarray:
    if norm == VQNorm.L1:
        return cdist(X, prototypes, "cityblock")
    return cdist(X, prototypes, "sqeuclidean")


def kmeanspp_seeds(X: np.ndarray, k: int, rng: np.random.Generator, norm: VQNorm = VQNorm.L2) -> np.ndarray:
    """k-means++ seeding: each new seed drawn with probability proportional to its current cost."""
    n = X.shape[0]
    if k > n:
        raise TooFewSamples(f"cannot pick {k} seeds from {n} rows")
    chosen = [int(rng.integers(n))]
    cost = _distances(X, X[chosen], norm)[:, 0]
    for _ in range(1, k):
        total = cost.sum()
        if total > 0:
            candidate = int(rng.choice(n, p=cost / total))
        else:
            remaining = np.setdiff1d(np.arange(n), chosen)
            candidate = int(rng.choice(remaining))
        chosen.append(candidate)
        cost = np.minimum(cost, _distances(X, X[[candidate]], norm)[:, 0])
    return X[chosen].copy()


@dataclass
class VQModel(BaseDetector):
    prototypes: np.ndarray
    norm: VQNorm = VQNorm.L2
    objective_history: List[float] = field(default_factory=list)

    family: ClassVar[ModelFamily] = ModelFamily.PROTOTYPES

    @property
    def n_features(self) -> int:
        return self.prototypes.shape[1]

    @property
    def k(self) -> int:
        return self.prototypes.shape[0]

    def _score_rows(self, X: np.ndarray) -> np.ndarray:
        return _distances(X, self.prototypes, self.norm).min(axis=1)

    def assign(self, X: np.ndarray) -> np.ndarray:
        return _distances(self._check(np.atleast_2d(X)), self.prototypes, self.norm).argmin(axis=1)


def _lloyd(X: np.ndarray, prototypes: np.ndarray, norm: VQNorm, max_iter: int):
    history: List[float] = []
    assignment: Optional[np.ndarray] = None
    for iteration in range(max_iter):
        dist = _distances(X, prototypes, norm)
        new_assignment = dist.argmin(axis=1)
        history.append(float(dist[np.arange(X.shape[0]), new_assignment].mean()))
        if assignment is not None and np.array_equal(new_assignment, assignment):
            break
        assignment = new_assignment

        for j in range(prototypes.shape[0]):
            members = X[assignment == j]
            if members.shape[0] == 0:
                # move the empty prototype onto the worst-represented point
                own = dist[np.arange(X.shape[0]), assignment]
                farthest = int(np.argmax(own))
                if own[farthest] <= 0:
                    raise EmptyCluster(f"cluster {j} is empty and every point already sits on a prototype")
                logger.warning(f"cluster {j} empty at iteration {iteration}, reseeding from row {farthest}")
                prototypes[j] = X[farthest]
                assignment[farthest] = j
                dist[farthest, :] = _distances(X[[farthest]], prototypes, norm)
                continue
            prototypes[j] = np.median(members, axis=0) if norm == VQNorm.L1 else members.mean(axis=0)
    return prototypes, history


def fit_vq(
    train: Dataset,
    k: int,
    norm: VQNorm = VQNorm.L2,
    seed: int = 0,
    max_iter: int = 300,
    n_init: int = 4,
) -> VQModel:
    """
    Lloyd iterations (means for L2, coordinate-wise medians for L1) from
    k-means++ seeds until the assignment stops changing. The best of ``n_init``
    seedings (lowest final objective) is kept.
    """
    norm = VQNorm(norm)
    X = train.rows
    if k < 1:
        raise InvalidConfig(f"K must be >= 1, got {k}")
    if X.shape[0] < k:
        raise TooFewSamples(f"VQ with K={k} needs at least {k} rows, got {X.shape[0]}")

    rng = np.random.default_rng(seed)
    best: Optional[VQModel] = None
    for _ in range(max(1, n_init)):
        prototypes, history = _lloyd(X, kmeanspp_seeds(X, k, rng, norm), norm, max_iter)
        if best is None or history[-1] < best.objective_history[-1]:
            best = VQModel(prototypes=prototypes, norm=norm, objective_history=history)
    logger.info(
        f"fitted VQ ({norm.value}) with K={k} on {X.shape[0]} rows, objective={best.objective_history[-1]:.6g}"
    )
    return best
