"""EvalReport assembly and emission as JSON or key/value CSV."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Union

import pandas as pd

from src.anoscope.core.types import DecisionThreshold
from src.anoscope.errors import ConfigError
from src.anoscope.evaluation.metrics import (
    LabeledScores,
    ThresholdMetrics,
    auroc,
    average_precision,
    precision_at_k,
    recall_at_k,
    threshold_metrics,
)
from src.utils.logging import get_logger

logger = get_logger(__name__)

REPORT_FORMATS = ("json", "csv")


@dataclass
class EvalReport:
    auroc: float
    ap: float
    n_normal: int
    n_anomaly: int
    precision_at_k: Dict[int, float] = field(default_factory=dict)
    recall_at_k: Dict[int, float] = field(default_factory=dict)
    threshold: Optional[DecisionThreshold] = None
    threshold_metrics: Optional[ThresholdMetrics] = None

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "auroc": self.auroc,
            "ap": self.ap,
            "n_normal": self.n_normal,
            "n_anomaly": self.n_anomaly,
            "precision_at_k": {str(k): v for k, v in sorted(self.precision_at_k.items())},
            "recall_at_k": {str(k): v for k, v in sorted(self.recall_at_k.items())},
        }
        if self.threshold_metrics is not None:
            tm = self.threshold_metrics
            out["threshold"] = {
                "tau": self.threshold.tau,
                "alpha": self.threshold.alpha,
                "false_alarm_rate": tm.false_alarm_rate,
                "miss_rate": tm.miss_rate,
                "counts": tm.counts._asdict(),
            }
        return out

    def flat_items(self) -> Iterable[tuple]:
        """(metric, value) pairs with nested keys joined by dots."""

        def walk(prefix: str, value: Any):
            if isinstance(value, dict):
                for key, inner in value.items():
                    yield from walk(f"{prefix}.{key}" if prefix else str(key), inner)
            else:
                yield prefix, value

        return list(walk("", self.to_dict()))


def evaluate(
    ls: LabeledScores,
    ks: Iterable[int] = (),
    threshold: Optional[DecisionThreshold] = None,
) -> EvalReport:
    report = EvalReport(
        auroc=auroc(ls),
        ap=average_precision(ls),
        n_normal=ls.n_normals,
        n_anomaly=ls.n_anomalies,
        precision_at_k={int(k): precision_at_k(ls, int(k)) for k in ks},
        recall_at_k={int(k): recall_at_k(ls, int(k)) for k in ks},
        threshold=threshold,
        threshold_metrics=threshold_metrics(ls, threshold) if threshold is not None else None,
    )
    logger.info(f"AUROC={report.auroc:.4f} AP={report.ap:.4f} on {len(ls)} scores ({ls.n_anomalies} anomalies)")
    return report


def write_report(report: EvalReport, path: Union[str, Path], fmt: str = "json") -> Path:
    if fmt not in REPORT_FORMATS:
        raise ConfigError(f"report format must be one of {REPORT_FORMATS}, got {fmt!r}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        with open(path, "w") as f:
            json.dump(report.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")
    else:
        frame = pd.DataFrame(report.flat_items(), columns=["metric", "value"])
        frame.to_csv(path, index=False, lineterminator="\n")
    return path
