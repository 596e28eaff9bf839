from src.anoscope.core.dimensions import (
    FeatureMap,
    FeatureMapKind,
    Inference,
    LossKind,
    ModelFamily,
    ModelingDimensions,
)
from src.anoscope.core.losses import one_class_hinge, one_class_objective, semi_sup_exponent, semi_supervised_hinge
from src.anoscope.core.thresholds import (
    calibrate_threshold,
    detect,
    detect_batch,
    empirical_p_value,
    level_set_membership,
)
from src.anoscope.core.types import Dataset, DecisionThreshold, Label, ScoreVector

__all__ = [
    "Dataset",
    "DecisionThreshold",
    "FeatureMap",
    "FeatureMapKind",
    "Inference",
    "Label",
    "LossKind",
    "ModelFamily",
    "ModelingDimensions",
    "ScoreVector",
    "calibrate_threshold",
    "detect",
    "detect_batch",
    "empirical_p_value",
    "level_set_membership",
    "one_class_hinge",
    "one_class_objective",
    "semi_sup_exponent",
    "semi_supervised_hinge",
]
