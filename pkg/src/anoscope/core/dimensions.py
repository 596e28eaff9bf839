"""The five modeling dimensions every detector is described by."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Any, Dict, Optional

if TYPE_CHECKING:
    from src.anoscope.deep.mlp import MLPSpec
    from src.anoscope.kernels import KernelSpec


class LossKind(str, Enum):
    NEG_LOG_LIKELIHOOD = "neg_log_likelihood"
    HINGE = "hinge"
    SHIFTED_HINGE = "shifted_hinge"
    LINEAR_ONE_CLASS = "linear_one_class"
    SEMI_SUP_EXPONENT = "semi_sup_exponent"
    SQUARED_ERROR = "squared_error"


class ModelFamily(str, Enum):
    GAUSSIAN = "gaussian"
    GMM = "gmm"
    KERNEL_DENSITY = "kernel_density"
    PPCA = "ppca"
    ELLIPSOID = "ellipsoid"
    HYPERSPHERE = "hypersphere"
    HYPERPLANE = "hyperplane"
    SUBSPACE = "subspace"
    PROTOTYPES = "prototypes"
    AUTOENCODER = "autoencoder"


class FeatureMapKind(str, Enum):
    RAW_INPUT = "raw_input"
    KERNEL = "kernel"
    NEURAL = "neural"


class Inference(str, Enum):
    FREQUENTIST = "frequentist"


@dataclass(frozen=True)
class FeatureMap:
    kind: FeatureMapKind
    kernel: Optional["KernelSpec"] = None
    mlp: Optional["MLPSpec"] = None

    @classmethod
    def raw(cls) -> "FeatureMap":
        return cls(FeatureMapKind.RAW_INPUT)

    @classmethod
    def from_kernel(cls, kernel: "KernelSpec") -> "FeatureMap":
        return cls(FeatureMapKind.KERNEL, kernel=kernel)

    @classmethod
    def neural(cls, mlp: Optional["MLPSpec"] = None) -> "FeatureMap":
        return cls(FeatureMapKind.NEURAL, mlp=mlp)


@dataclass(frozen=True)
class ModelingDimensions:
    """
    (loss, model family, feature map, regularization, inference) of a detector.

    ``regularization`` holds the structured hyperparameters of the row
    (nu, K, d, variance_fraction, weight decay, ...). Inference is always
    frequentist.
    """

    loss: LossKind
    model_family: ModelFamily
    feature_map: FeatureMap
    regularization: Dict[str, Any] = field(default_factory=dict)
    inference: Inference = Inference.FREQUENTIST

    def key(self):
        return (self.loss, self.model_family, self.feature_map.kind)

    def with_regularization(self, **updates: Any) -> "ModelingDimensions":
        merged = dict(self.regularization)
        merged.update({k: v for k, v in updates.items() if v is not None})
        return ModelingDimensions(self.loss, self.model_family, self.feature_map, merged, self.inference)

    def with_feature_map(self, feature_map: FeatureMap) -> "ModelingDimensions":
        return ModelingDimensions(self.loss, self.model_family, feature_map, dict(self.regularization), self.inference)
