"""Mixing unnoticed anomalies into nominally normal data."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from src.anoscope.core.types import Dataset
from src.anoscope.errors import DegenerateBox, InvalidConfig


@dataclass
class UniformBox:
    low: np.ndarray
    high: np.ndarray

    def __post_init__(self) -> None:
        self.low = np.atleast_1d(np.asarray(self.low, dtype=np.float64))
        self.high = np.atleast_1d(np.asarray(self.high, dtype=np.float64))
        if self.low.shape != self.high.shape:
            raise DegenerateBox(f"box corners have shapes {self.low.shape} and {self.high.shape}")
        if not np.all(np.isfinite(self.low)) or not np.all(np.isfinite(self.high)):
            raise DegenerateBox("box corners must be finite")
        if np.any(self.high <= self.low):
            raise DegenerateBox(f"box is degenerate: low={self.low.tolist()}, high={self.high.tolist()}")

    @property
    def dim(self) -> int:
        return self.low.shape[0]

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.low + self.high)

    def sample(self, m: int, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(self.low, self.high, size=(m, self.dim))

    @classmethod
    def around(cls, data: Dataset, margin: float = 0.1) -> "UniformBox":
        """Bounding box of ``data`` widened by ``margin`` times its extent on each side."""
        low, high = data.rows.min(axis=0), data.rows.max(axis=0)
        extent = np.where(high > low, high - low, 1.0)
        return cls(low - margin * extent, high + margin * extent)


@dataclass
class ContaminationSpec:
    eta: float
    box: UniformBox

    def __post_init__(self) -> None:
        if not 0.0 <= self.eta < 1.0:
            raise InvalidConfig(f"contamination rate eta must lie in [0, 1), got {self.eta}")


def contaminate(
    normal: Dataset,
    spec: ContaminationSpec,
    seed: int = 0,
    return_mask: bool = False,
) -> Union[Dataset, Tuple[Dataset, np.ndarray]]:
    """
    Replace each row independently with probability eta by a draw from the
    anomaly box. Labels are left untouched: the contamination goes unnoticed.
    """
    if spec.box.dim != normal.dim:
        raise InvalidConfig(f"anomaly box has dimension {spec.box.dim}, data has {normal.dim}")
    rng = np.random.default_rng(seed)
    replaced = rng.random(normal.n) < spec.eta
    rows = normal.rows.copy()
    if np.any(replaced):
        rows[replaced] = spec.box.sample(int(replaced.sum()), rng)
    result = Dataset(rows, normal.labels.copy(), normal.feature_names)
    return (result, replaced) if return_mask else result
