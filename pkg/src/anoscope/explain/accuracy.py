"""Agreement between relevance heatmaps and planted ground-truth masks."""

from __future__ import annotations

from typing import Sequence, Union

import numpy as np

from src.anoscope.errors import DimensionMismatch, InvalidConfig, ZeroHeatmap
from src.anoscope.explain.heatmap import Heatmap, lrp_heatmap
from src.anoscope.models.kde import KDEModel
from src.utils.logging import get_logger

logger = get_logger(__name__)


def explanation_accuracy(heatmap: Union[Heatmap, Sequence[float]], mask: Sequence[float]) -> float:
    """Cosine similarity between the relevance vector and a 0/1 mask, in [-1, 1]."""
    relevance = heatmap.relevance if isinstance(heatmap, Heatmap) else np.asarray(heatmap, dtype=np.float64)
    mask = np.asarray(mask, dtype=np.float64).reshape(-1)
    if relevance.shape != mask.shape:
        raise DimensionMismatch(f"heatmap has {relevance.size} entries, mask has {mask.size}")
    relevance_norm = float(np.linalg.norm(relevance))
    if relevance_norm == 0.0:
        raise ZeroHeatmap("cannot compare an all-zero heatmap with a mask")
    mask_norm = float(np.linalg.norm(mask))
    if mask_norm == 0.0:
        raise InvalidConfig("mask marks no relevant feature")
    return float(np.clip(relevance @ mask / (relevance_norm * mask_norm), -1.0, 1.0))


def mean_explanation_accuracy(model: KDEModel, X: np.ndarray, masks: np.ndarray, **options) -> float:
    """
    Average explanation_accuracy over the rows of ``X`` whose mask is non-empty.

    Rows with an all-zero mask (normal probes) are skipped. ``options`` are
    forwarded to lrp_heatmap.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    masks = np.atleast_2d(np.asarray(masks, dtype=np.float64))
    if X.shape[0] != masks.shape[0]:
        raise DimensionMismatch(f"{X.shape[0]} probes but {masks.shape[0]} masks")

    values = [
        explanation_accuracy(lrp_heatmap(model, x, **options), mask)
        for x, mask in zip(X, masks)
        if np.any(mask)
    ]
    if not values:
        raise InvalidConfig("no probe carries a non-empty mask")
    mean = float(np.mean(values))
    logger.info(f"mean explanation accuracy {mean:.4f} over {len(values)} probes")
    return mean
