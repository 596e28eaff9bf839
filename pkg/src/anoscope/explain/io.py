"""Heatmap file emission: one CSV row per probe, or a PGM image for grid data."""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd

from src.anoscope.errors import DimensionMismatch, InvalidConfig
from src.anoscope.explain.heatmap import Heatmap


def write_heatmaps_csv(
    heatmaps: Sequence[Heatmap],
    path: Union[str, Path],
    probe_ids: Optional[Sequence] = None,
) -> Path:
    """Columns ``probe_id,score,R_1..R_D``."""
    if not heatmaps:
        raise InvalidConfig("no heatmaps to write")
    dims = {h.relevance.size for h in heatmaps}
    if len(dims) != 1:
        raise DimensionMismatch(f"heatmaps of differing lengths {sorted(dims)}")
    probe_ids = list(range(len(heatmaps))) if probe_ids is None else list(probe_ids)
    if len(probe_ids) != len(heatmaps):
        raise DimensionMismatch(f"{len(probe_ids)} probe ids for {len(heatmaps)} heatmaps")

    dim = dims.pop()
    frame = pd.DataFrame(np.vstack([h.relevance for h in heatmaps]), columns=[f"R_{i + 1}" for i in range(dim)])
    frame.insert(0, "score", [h.score for h in heatmaps])
    frame.insert(0, "probe_id", probe_ids)

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n", float_format="%.17g")
    return path


def write_heatmap_pgm(values: np.ndarray, path: Union[str, Path], maxval: int = 255) -> Path:
    """
    Write a 2-D array as a binary (P5) grayscale PGM, min-max scaled so the
    largest value is white. A constant array is written black.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise DimensionMismatch(f"PGM output needs a 2-D grid, got shape {values.shape}")
    if not 0 < maxval < 256:
        raise InvalidConfig(f"maxval must lie in 1..255, got {maxval}")

    low, high = float(values.min()), float(values.max())
    scaled = np.zeros_like(values) if high == low else (values - low) / (high - low)
    pixels = np.rint(scaled * maxval).astype(np.uint8)

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    height, width = pixels.shape
    with open(path, "wb") as handle:
        handle.write(f"P5\n{width} {height}\n{maxval}\n".encode("ascii"))
        handle.write(pixels.tobytes())
    return path
