"""Turning anomaly scores into binary decisions."""

from __future__ import annotations

import math
from typing import TYPE_CHECKING, Sequence, Union

import numpy as np

from src.anoscope.core.types import DecisionThreshold, Label, ScoreVector, as_scores
from src.anoscope.errors import AlphaOutOfRange, EmptyScores, ModelHasNoIntrinsicBoundary

if TYPE_CHECKING:
    from src.anoscope.models.base import BaseDetector

# guards ceil() against (1 - alpha) * n landing a hair above an integer
_CUT_TOLERANCE = 1e-12


def calibrate_threshold(scores: Union[ScoreVector, Sequence[float], np.ndarray], alpha: float) -> DecisionThreshold:
    """
    Smallest sample score t with #{s_i <= t} / n >= 1 - alpha.

    Flagging every score >= tau leaves at most ceil(alpha * n) sample points
    strictly above tau. alpha = 1 yields the sample minimum, alpha = 0 the maximum.
    """
    if not 0.0 <= alpha <= 1.0 or math.isnan(alpha):
        raise AlphaOutOfRange(f"alpha must lie in [0, 1], got {alpha}")
    values = as_scores(scores)
    if values.size == 0:
        raise EmptyScores("cannot calibrate a threshold on zero scores")

    ordered = np.sort(values)
    n = ordered.size
    cut = math.ceil((1.0 - alpha) * n - _CUT_TOLERANCE)
    tau = float(ordered[max(cut, 1) - 1])
    return DecisionThreshold(tau=tau, alpha=float(alpha))


def detect(score: float, threshold: DecisionThreshold) -> Label:
    """Anomaly iff score >= tau (the boundary itself counts as anomalous)."""
    return Label.ANOMALY if score >= threshold.tau else Label.NORMAL


def detect_batch(scores: Union[ScoreVector, Sequence[float], np.ndarray], threshold: DecisionThreshold) -> np.ndarray:
    values = as_scores(scores)
    return np.where(values >= threshold.tau, int(Label.ANOMALY), int(Label.NORMAL)).astype(np.int8)


def empirical_p_value(calibration_scores: Union[ScoreVector, Sequence[float], np.ndarray], score: float) -> float:
    """Fraction of calibration scores at least as anomalous as ``score``."""
    values = as_scores(calibration_scores)
    if values.size == 0:
        raise EmptyScores("cannot compute a p-value against zero calibration scores")
    return float(np.mean(values >= score))


def level_set_membership(model: "BaseDetector", x: Union[Sequence[float], np.ndarray]) -> Label:
    """
    Normal iff the model's own decision value is negative, i.e. x falls inside
    the estimated level set. Models without an intrinsic boundary must be
    thresholded with calibrate_threshold instead.
    """
    if not getattr(model, "has_intrinsic_boundary", False):
        raise ModelHasNoIntrinsicBoundary(
            f"{type(model).__name__} has no intrinsic decision boundary; use calibrate_threshold"
        )
    value = float(model.decision_function(np.atleast_2d(np.asarray(x, dtype=np.float64)))[0])
    return Label.NORMAL if value < 0 else Label.ANOMALY
