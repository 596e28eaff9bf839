from src.anoscope.explain.accuracy import explanation_accuracy, mean_explanation_accuracy
from src.anoscope.explain.heatmap import (
    GradientMode,
    GradientTarget,
    Heatmap,
    heatmap_batch,
    lrp_heatmap,
    probe_term_gradients,
    training_point_gradients,
)
from src.anoscope.explain.io import write_heatmap_pgm, write_heatmaps_csv
from src.anoscope.explain.neuralize import NeuralizedKDE, neuralize_kde

__all__ = [
    "GradientMode",
    "GradientTarget",
    "Heatmap",
    "NeuralizedKDE",
    "explanation_accuracy",
    "heatmap_batch",
    "lrp_heatmap",
    "mean_explanation_accuracy",
    "neuralize_kde",
    "probe_term_gradients",
    "training_point_gradients",
    "write_heatmap_pgm",
    "write_heatmaps_csv",
]
