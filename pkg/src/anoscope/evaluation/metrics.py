"""
Detection metrics over (score, truth) pairs.

Scores are oriented "larger = more anomalous" and anomalies are the positive
class. Tied scores share credit: AUROC counts a tied (anomaly, normal) pair as
one half, average precision evaluates precision once per tie group.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import trapezoid
from scipy.stats import rankdata

from src.anoscope.core.thresholds import detect_batch
from src.anoscope.core.types import Dataset, DecisionThreshold, Label, ScoreVector, as_scores
from src.anoscope.errors import DimensionMismatch, InvalidDataset, KOutOfRange, NoAnomalies, SingleClass


@dataclass(frozen=True)
class LabeledScores:
    scores: np.ndarray
    is_anomaly: np.ndarray

    def __post_init__(self) -> None:
        scores = as_scores(self.scores)
        is_anomaly = np.asarray(self.is_anomaly, dtype=bool).reshape(-1)
        if scores.shape != is_anomaly.shape:
            raise DimensionMismatch(f"{scores.size} scores but {is_anomaly.size} labels")
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "is_anomaly", is_anomaly)

    @classmethod
    def from_labels(cls, scores: Union[ScoreVector, Sequence[float], np.ndarray], labels: Sequence[int]) -> "LabeledScores":
        labels = np.asarray(labels, dtype=int).reshape(-1)
        if np.any(labels == int(Label.UNLABELED)):
            raise InvalidDataset("evaluation needs every row labelled Normal or Anomaly")
        return cls(as_scores(scores), labels == int(Label.ANOMALY))

    @classmethod
    def from_dataset(cls, scores: Union[ScoreVector, Sequence[float], np.ndarray], data: Dataset) -> "LabeledScores":
        return cls.from_labels(scores, data.labels)

    def __len__(self) -> int:
        return self.scores.size

    @property
    def n_anomalies(self) -> int:
        return int(self.is_anomaly.sum())

    @property
    def n_normals(self) -> int:
        return int((~self.is_anomaly).sum())

    @property
    def anomaly_fraction(self) -> float:
        return self.n_anomalies / len(self)

    def require_both_classes(self) -> None:
        if self.n_anomalies == 0 or self.n_normals == 0:
            raise SingleClass(f"need both classes, got {self.n_anomalies} anomalies and {self.n_normals} normals")


def auroc(ls: LabeledScores) -> float:
    """Mann-Whitney estimate: P(anomaly score > normal score) + 1/2 P(tie)."""
    ls.require_both_classes()
    ranks = rankdata(ls.scores, method="average")
    m, n = ls.n_anomalies, ls.n_normals
    u = ranks[ls.is_anomaly].sum() - m * (m + 1) / 2.0
    return float(u / (m * n))


def _threshold_counts(ls: LabeledScores) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    False and true positive counts when flagging every score >= t, for each
    distinct score t in decreasing order.
    """
    order = np.argsort(ls.scores, kind="mergesort")[::-1]
    scores = ls.scores[order]
    truth = ls.is_anomaly[order]
    # last position of every tie group
    group_ends = np.r_[np.flatnonzero(np.diff(scores)), scores.size - 1]
    tps = np.cumsum(truth)[group_ends]
    fps = (group_ends + 1) - tps
    return fps, tps, scores[group_ends]


def roc_curve(ls: LabeledScores) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(fpr, tpr, thresholds), starting at (0, 0) with threshold +inf."""
    ls.require_both_classes()
    fps, tps, thresholds = _threshold_counts(ls)
    fpr = np.r_[0.0, fps / ls.n_normals]
    tpr = np.r_[0.0, tps / ls.n_anomalies]
    return fpr, tpr, np.r_[np.inf, thresholds]


def roc_auc_trapezoid(ls: LabeledScores) -> float:
    fpr, tpr, _ = roc_curve(ls)
    return float(trapezoid(tpr, fpr))


def precision_recall_curve(ls: LabeledScores) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(precision, recall, thresholds) per tie group, thresholds decreasing."""
    if ls.n_anomalies == 0:
        raise NoAnomalies("precision/recall need at least one anomaly")
    fps, tps, thresholds = _threshold_counts(ls)
    precision = tps / (tps + fps)
    recall = tps / ls.n_anomalies
    return precision, recall, thresholds


def average_precision(ls: LabeledScores) -> float:
    """AP = sum over tie groups of (recall increment) * (precision at the end of the group)."""
    precision, recall, _ = precision_recall_curve(ls)
    return float(np.sum(np.diff(np.r_[0.0, recall]) * precision))


def _top_k(ls: LabeledScores, k: int) -> np.ndarray:
    if not 1 <= k <= len(ls):
        raise KOutOfRange(f"k must lie in 1..{len(ls)}, got {k}")
    # stable descending order: ties at position k go to the earlier row
    order = np.argsort(-ls.scores, kind="stable")
    return ls.is_anomaly[order[:k]]


def precision_at_k(ls: LabeledScores, k: int) -> float:
    return float(_top_k(ls, k).sum() / k)


def recall_at_k(ls: LabeledScores, k: int) -> float:
    hits = _top_k(ls, k).sum()
    if ls.n_anomalies == 0:
        raise NoAnomalies("recall@k needs at least one anomaly")
    return float(hits / ls.n_anomalies)


class ConfusionCounts(NamedTuple):
    true_positives: int
    false_positives: int
    true_negatives: int
    false_negatives: int


class ThresholdMetrics(NamedTuple):
    false_alarm_rate: float
    miss_rate: float
    counts: ConfusionCounts


def threshold_metrics(ls: LabeledScores, threshold: DecisionThreshold) -> ThresholdMetrics:
    """Rates of the binary detector that flags every score >= tau."""
    ls.require_both_classes()
    flagged = detect_batch(ls.scores, threshold) == int(Label.ANOMALY)
    tp = int(np.sum(flagged & ls.is_anomaly))
    fp = int(np.sum(flagged & ~ls.is_anomaly))
    counts = ConfusionCounts(
        true_positives=tp,
        false_positives=fp,
        true_negatives=ls.n_normals - fp,
        false_negatives=ls.n_anomalies - tp,
    )
    return ThresholdMetrics(
        false_alarm_rate=fp / ls.n_normals,
        miss_rate=counts.false_negatives / ls.n_anomalies,
        counts=counts,
    )
