"""CSV ingestion and emission of datasets and score tables."""

from __future__ import annotations

from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from src.anoscope.core.types import Dataset, Label
from src.anoscope.errors import InvalidDataset, MissingFile, ParseError
from src.utils.logging import get_logger

logger = get_logger(__name__)

LABEL_TEXT = {int(Label.NORMAL): "+1", int(Label.ANOMALY): "-1", int(Label.UNLABELED): ""}
SCORE_COLUMNS = ["row_id", "score", "label"]


def _label_column_index(label_column: Union[str, int, None], header: List[str]) -> Optional[int]:
    if label_column is None:
        return None
    if isinstance(label_column, int) or str(label_column).lstrip("-").isdigit():
        index = int(label_column)
        if index < 0:
            index += len(header)
        if not 0 <= index < len(header):
            raise InvalidDataset(f"label column {label_column} out of range for {len(header)} columns")
        return index
    if label_column not in header:
        raise InvalidDataset(f"label column '{label_column}' not found in header {header}")
    return header.index(label_column)


def load_csv(
    path: Union[str, Path],
    has_header: bool = True,
    label_column: Union[str, int, None] = None,
) -> Dataset:
    """
    Read a comma-separated file into a Dataset, rows in file order.

    ``label_column`` (name or zero-based index) holds +1 / -1 / blank labels.
    ParseError locations are zero-based data row and column indices.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"no such file: {path}")

    frame = pd.read_csv(
        path,
        header=0 if has_header else None,
        dtype=str,
        keep_default_na=False,
        skipinitialspace=True,
        encoding="utf-8",
    )
    header = [str(name).strip() for name in frame.columns] if has_header else [f"x{i + 1}" for i in range(frame.shape[1])]
    label_index = _label_column_index(label_column, header)
    raw = frame.to_numpy()
    if raw.shape[0] == 0:
        raise InvalidDataset(f"{path} contains no data rows")

    feature_columns = [j for j in range(raw.shape[1]) if j != label_index]
    rows = np.empty((raw.shape[0], len(feature_columns)))
    labels = np.zeros(raw.shape[0], dtype=np.int8)
    for i in range(raw.shape[0]):
        for out, j in enumerate(feature_columns):
            cell = str(raw[i, j]).strip()
            try:
                value = float(cell)
            except ValueError:
                raise ParseError(i, j, f"cannot parse {cell!r} as a real number") from None
            if not np.isfinite(value):
                raise ParseError(i, j, f"non-finite value {cell!r}")
            rows[i, out] = value
        if label_index is not None:
            try:
                labels[i] = int(Label.parse(str(raw[i, label_index])))
            except ValueError as exc:
                raise ParseError(i, label_index, str(exc)) from None

    names = [header[j] for j in feature_columns] if has_header else None
    logger.info(f"loaded {rows.shape[0]} rows x {rows.shape[1]} features from {path}")
    return Dataset(rows, labels, names)


def write_csv(dataset: Dataset, path: Union[str, Path], include_labels: bool = True) -> Path:
    """Inverse of load_csv: header row, features, then a ``label`` column of +1 / -1 / blank."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = dataset.feature_names or [f"x{i + 1}" for i in range(dataset.dim)]
    frame = pd.DataFrame(dataset.rows, columns=names)
    if include_labels:
        frame["label"] = [LABEL_TEXT[int(v)] for v in dataset.labels]
    frame.to_csv(path, index=False, lineterminator="\n")
    return path


def write_scores_csv(scores: np.ndarray, labels: Optional[np.ndarray], path: Union[str, Path]) -> Path:
    """One ``row_id,score,label`` line per scored row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.zeros(scores.shape[0], dtype=int) if labels is None else np.asarray(labels)
    frame = pd.DataFrame(
        {
            "row_id": np.arange(scores.shape[0]),
            "score": scores,
            "label": [LABEL_TEXT[int(v)] for v in labels],
        }
    )
    frame.to_csv(path, index=False, lineterminator="\n")
    return path


def load_scores_csv(path: Union[str, Path]) -> Tuple[np.ndarray, np.ndarray]:
    """Read a ``row_id,score,label`` file back into (scores, labels), ordered by row_id."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"no such file: {path}")
    frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    missing = [c for c in SCORE_COLUMNS if c not in frame.columns]
    if missing:
        raise InvalidDataset(f"{path} lacks score columns {missing}")
    if frame.shape[0] == 0:
        raise InvalidDataset(f"{path} contains no scores")

    order = np.empty(frame.shape[0], dtype=np.int64)
    scores = np.empty(frame.shape[0])
    labels = np.zeros(frame.shape[0], dtype=np.int8)
    for i, (row_id, score, label) in enumerate(frame[SCORE_COLUMNS].itertuples(index=False)):
        try:
            order[i] = int(row_id)
            scores[i] = float(score)
        except ValueError:
            raise ParseError(i, 1, f"cannot parse row ({row_id!r}, {score!r})") from None
        if not np.isfinite(scores[i]):
            raise ParseError(i, 1, f"non-finite score {score!r}")
        try:
            labels[i] = int(Label.parse(label))
        except ValueError as exc:
            raise ParseError(i, 2, str(exc)) from None
    index = np.argsort(order, kind="mergesort")
    return scores[index], labels[index]
