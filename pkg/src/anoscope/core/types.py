"""Data containers shared across the toolkit."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np

from src.anoscope.errors import InvalidDataset


class Label(IntEnum):
    """Per-row ground truth. NORMAL/ANOMALY carry the usual y = +1 / -1 encoding."""

    NORMAL = 1
    ANOMALY = -1
    UNLABELED = 0

    @classmethod
    def parse(cls, raw: Union[str, int, float, None]) -> "Label":
        if raw is None:
            return cls.UNLABELED
        if isinstance(raw, str):
            text = raw.strip()
            if text == "":
                return cls.UNLABELED
            raw = float(text)
        value = int(raw)
        if value != raw or value not in (1, -1):
            raise ValueError(f"label must be +1, -1 or blank, got {raw!r}")
        return cls(value)


@dataclass
class Dataset:
    """
    An n x D matrix of finite reals with one label per row.
    """

    rows: np.ndarray
    labels: np.ndarray = None
    feature_names: Optional[List[str]] = None

    def __post_init__(self) -> None:
        rows = np.asarray(self.rows, dtype=np.float64)
        if rows.ndim == 1:
            rows = rows.reshape(-1, 1)
        if rows.ndim != 2 or rows.shape[0] < 1 or rows.shape[1] < 1:
            raise InvalidDataset(f"dataset needs shape (n>=1, D>=1), got {rows.shape}")
        if not np.all(np.isfinite(rows)):
            raise InvalidDataset("dataset contains non-finite entries")
        self.rows = rows

        if self.labels is None:
            labels = np.full(rows.shape[0], int(Label.UNLABELED), dtype=np.int8)
        else:
            labels = np.asarray([int(Label(int(v))) for v in self.labels], dtype=np.int8)
        if labels.shape[0] != rows.shape[0]:
            raise InvalidDataset(
                f"labels length {labels.shape[0]} does not match row count {rows.shape[0]}"
            )
        self.labels = labels

        if self.feature_names is not None:
            self.feature_names = [str(name) for name in self.feature_names]
            if len(self.feature_names) != rows.shape[1]:
                raise InvalidDataset("feature_names length does not match column count")

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    def subset(self, index: Union[Sequence[int], np.ndarray]) -> "Dataset":
        index = np.asarray(index)
        return Dataset(self.rows[index], self.labels[index], self.feature_names)

    def with_rows(self, rows: np.ndarray) -> "Dataset":
        return Dataset(rows, self.labels.copy(), self.feature_names)

    def mask(self, label: Label) -> np.ndarray:
        return self.labels == int(label)

    def count(self, label: Label) -> int:
        return int(np.sum(self.mask(label)))

    @property
    def has_labels(self) -> bool:
        return bool(np.any(self.labels != int(Label.UNLABELED)))

    @classmethod
    def concat(cls, parts: Iterable["Dataset"]) -> "Dataset":
        parts = [p for p in parts if p is not None]
        if not parts:
            raise InvalidDataset("cannot concatenate zero datasets")
        dims = {p.dim for p in parts}
        if len(dims) != 1:
            raise InvalidDataset(f"cannot concatenate datasets of dimensions {sorted(dims)}")
        return cls(
            np.vstack([p.rows for p in parts]),
            np.concatenate([p.labels for p in parts]),
            parts[0].feature_names,
        )


@dataclass(frozen=True)
class ScoreVector:
    """Anomaly scores, larger = more anomalous."""

    scores: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self) -> None:
        scores = np.array(self.scores, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(scores)):
            raise ValueError("scores must be finite")
        scores.setflags(write=False)
        object.__setattr__(self, "scores", scores)

    def __len__(self) -> int:
        return self.scores.shape[0]


@dataclass(frozen=True)
class DecisionThreshold:
    tau: float
    alpha: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")


def as_scores(scores: Union[ScoreVector, Sequence[float], np.ndarray]) -> np.ndarray:
    if isinstance(scores, ScoreVector):
        return scores.scores
    return ScoreVector(np.asarray(scores, dtype=np.float64)).scores
