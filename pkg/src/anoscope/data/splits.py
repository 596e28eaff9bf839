"""Stratified train/validation/test splits and small training hold-outs."""

from __future__ import annotations

from typing import Optional, Sequence, Tuple

import numpy as np

from src.anoscope.core.types import Dataset, Label
from src.anoscope.errors import FractionsInvalid, InvalidConfig, TooFewSamples


def _part_sizes(count: int, fractions: np.ndarray) -> np.ndarray:
    # rounding cumulative boundaries keeps every part within one row of its share
    boundaries = np.rint(np.cumsum(fractions) * count).astype(int)
    boundaries[-1] = count
    return np.diff(np.concatenate([[0], boundaries]))


def stratified_split(
    data: Dataset,
    fractions: Sequence[float] = (0.6, 0.1, 0.3),
    seed: int = 0,
) -> Tuple[Optional[Dataset], ...]:
    """
    Split ``data`` into len(fractions) parts, preserving the anomaly ratio of
    each part up to rounding. Empty parts come back as None.
    """
    fractions = np.asarray(fractions, dtype=np.float64)
    if fractions.ndim != 1 or fractions.size == 0 or np.any(fractions < 0) or abs(fractions.sum() - 1.0) > 1e-9:
        raise FractionsInvalid(f"fractions must be non-negative and sum to 1, got {fractions.tolist()}")

    rng = np.random.default_rng(seed)
    parts = [[] for _ in fractions]
    anomalous = data.mask(Label.ANOMALY)
    for group in (np.flatnonzero(anomalous), np.flatnonzero(~anomalous)):
        if group.size == 0:
            continue
        shuffled = rng.permutation(group)
        start = 0
        for index, size in enumerate(_part_sizes(group.size, fractions)):
            parts[index].append(shuffled[start : start + size])
            start += size

    result = []
    for chunks in parts:
        index = np.sort(np.concatenate(chunks)) if chunks else np.array([], dtype=int)
        result.append(data.subset(index) if index.size else None)
    return tuple(result)


def holdout_split(data: Dataset, fraction: float = 0.1, seed: int = 0) -> Tuple[Dataset, Dataset]:
    """Set aside a random ``fraction`` of the rows (at least one) as a hold-out."""
    if not 0.0 < fraction < 1.0:
        raise InvalidConfig(f"hold-out fraction must lie in (0, 1), got {fraction}")
    if data.n < 2:
        raise TooFewSamples(f"a hold-out split needs at least 2 rows, got {data.n}")
    n_holdout = min(max(1, int(round(fraction * data.n))), data.n - 1)
    order = np.random.default_rng(seed).permutation(data.n)
    return data.subset(np.sort(order[n_holdout:])), data.subset(np.sort(order[:n_holdout]))
