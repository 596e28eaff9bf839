from src.anoscope.evaluation.metrics import (
    ConfusionCounts,
    LabeledScores,
    ThresholdMetrics,
    auroc,
    average_precision,
    precision_at_k,
    precision_recall_curve,
    recall_at_k,
    roc_auc_trapezoid,
    roc_curve,
    threshold_metrics,
)
from src.anoscope.evaluation.report import EvalReport, evaluate, write_report

__all__ = [
    "ConfusionCounts",
    "EvalReport",
    "LabeledScores",
    "ThresholdMetrics",
    "auroc",
    "average_precision",
    "evaluate",
    "precision_at_k",
    "precision_recall_curve",
    "recall_at_k",
    "roc_auc_trapezoid",
    "roc_curve",
    "threshold_metrics",
    "write_report",
]
