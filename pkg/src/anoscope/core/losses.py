"""Per-point losses of the one-class objective and its empirical risk."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from src.anoscope.core.dimensions import LossKind
from src.anoscope.core.types import Label
from src.anoscope.errors import InvalidNu, UnlabeledInput, UnsupportedCombination

# distances below this are floored before the inverse-distance anomaly loss
SAD_DISTANCE_FLOOR = 1e-6


def _label(y) -> Label:
    label = Label(int(y))
    if label == Label.UNLABELED:
        raise UnlabeledInput("loss needs a Normal (+1) or Anomaly (-1) label")
    return label


def one_class_hinge(s: float, y, nu: float) -> float:
    """Shifted, cost-weighted hinge: max(0, s)/(1+nu) for normals, nu*max(0, -s)/(1+nu) for anomalies."""
    if not 0.0 < nu <= 1.0:
        raise InvalidNu(f"nu must lie in (0, 1], got {nu}")
    if _label(y) == Label.NORMAL:
        return max(0.0, s) / (1.0 + nu)
    return nu * max(0.0, -s) / (1.0 + nu)


def semi_supervised_hinge(s: float, y) -> float:
    """max(0, y s): labeled anomalies pay for landing inside the boundary."""
    return max(0.0, int(_label(y)) * s)


def semi_sup_exponent(distance2: float, y) -> float:
    """distance^y: the squared distance for normals, its inverse for anomalies."""
    if _label(y) == Label.NORMAL:
        return distance2
    return 1.0 / max(distance2, SAD_DISTANCE_FLOOR)


def one_class_objective(
    unlabeled_scores: Sequence[float],
    labeled_scores: Optional[Sequence[float]] = None,
    labels: Optional[Sequence[int]] = None,
    loss: LossKind = LossKind.SHIFTED_HINGE,
    nu: float = 0.1,
) -> float:
    """
    Empirical one-class risk: mean loss over unlabeled scores taken as normal,
    plus mean loss over the labeled scores with their labels.
    """
    def point_loss(s: float, y) -> float:
        if loss == LossKind.SHIFTED_HINGE:
            return one_class_hinge(s, y, nu)
        if loss == LossKind.HINGE:
            return semi_supervised_hinge(s, y)
        if loss == LossKind.SEMI_SUP_EXPONENT:
            return semi_sup_exponent(s, y)
        if loss in (LossKind.LINEAR_ONE_CLASS, LossKind.SQUARED_ERROR, LossKind.NEG_LOG_LIKELIHOOD):
            if _label(y) != Label.NORMAL:
                raise UnsupportedCombination("loss", f"{loss.value} has no term for labeled anomalies")
            return s
        raise UnsupportedCombination("loss", f"unknown loss {loss}")

    unlabeled = np.asarray(unlabeled_scores, dtype=np.float64).reshape(-1)
    total = float(np.mean([point_loss(s, Label.NORMAL) for s in unlabeled])) if unlabeled.size else 0.0
    if labeled_scores is not None and len(labeled_scores) > 0:
        if labels is None or len(labels) != len(labeled_scores):
            raise UnlabeledInput("labeled scores need one label each")
        total += float(np.mean([point_loss(s, y) for s, y in zip(labeled_scores, labels)]))
    return total
