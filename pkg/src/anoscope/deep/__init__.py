from src.anoscope.deep.autoencoder import AEModel, fit_autoencoder
from src.anoscope.deep.deep_svdd import DeepSVDDModel, DeepSVDDVariant, embedding_variance, fit_deep_svdd
from src.anoscope.deep.mlp import MLP, Activation, Layer, LayerGrad, MLPSpec, Tape, mlp_backward, mlp_forward
from src.anoscope.deep.optim import Optimizer, OptimizerKind, OptimizerSpec

__all__ = [
    "AEModel",
    "Activation",
    "DeepSVDDModel",
    "DeepSVDDVariant",
    "Layer",
    "LayerGrad",
    "MLP",
    "MLPSpec",
    "Optimizer",
    "OptimizerKind",
    "OptimizerSpec",
    "Tape",
    "embedding_variance",
    "fit_autoencoder",
    "fit_deep_svdd",
    "mlp_backward",
    "mlp_forward",
]
