"""
Small fully connected networks on numpy with exact backpropagation.

A forward pass returns the output together with a tape holding, per layer, the
layer input and its pre-activation. The tape is all ``mlp_backward`` needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from src.anoscope.errors import DimensionMismatch, InvalidConfig


class Activation(str, Enum):
    ELU = "elu"
    RELU = "relu"
    LINEAR = "linear"

    def apply(self, z: np.ndarray) -> np.ndarray:
        if self == Activation.ELU:
            return np.where(z > 0, z, np.expm1(np.minimum(z, 0.0)))
        if self == Activation.RELU:
            return np.maximum(z, 0.0)
        return z

    def derivative(self, z: np.ndarray) -> np.ndarray:
        if self == Activation.ELU:
            return np.where(z > 0, 1.0, np.exp(np.minimum(z, 0.0)))
        if self == Activation.RELU:
            return (z > 0).astype(np.float64)
        return np.ones_like(z)


@dataclass
class MLPSpec:
    """
    Topology of a network: ``layer_dims = [D, h_1, ..., d]`` gives
    len(layer_dims) - 1 affine layers. Hidden layers use ``activation``, the
    last one ``output_activation``.
    """

    layer_dims: List[int]
    activation: Activation = Activation.ELU
    use_bias: bool = True
    seed: int = 0
    output_activation: Activation = Activation.LINEAR

    def __post_init__(self) -> None:
        self.layer_dims = [int(d) for d in self.layer_dims]
        if len(self.layer_dims) < 2:
            raise InvalidConfig("an MLP needs at least one layer (two layer dims)")
        if any(d < 1 for d in self.layer_dims):
            raise InvalidConfig(f"layer dims must be positive, got {self.layer_dims}")
        self.activation = Activation(self.activation)
        self.output_activation = Activation(self.output_activation)


@dataclass
class Layer:
    weight: np.ndarray  # (out, in)
    bias: Optional[np.ndarray]
    activation: Activation

    @property
    def in_dim(self) -> int:
        return self.weight.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weight.shape[0]


@dataclass
class LayerGrad:
    weight: np.ndarray
    bias: Optional[np.ndarray]


@dataclass
class Tape:
    inputs: List[np.ndarray] = field(default_factory=list)
    preactivations: List[np.ndarray] = field(default_factory=list)
    squeeze: bool = False


@dataclass
class MLP:
    layers: List[Layer]

    @classmethod
    def from_spec(cls, spec: MLPSpec) -> "MLP":
        rng = np.random.default_rng(spec.seed)
        layers = []
        n_layers = len(spec.layer_dims) - 1
        for index, (fan_in, fan_out) in enumerate(zip(spec.layer_dims[:-1], spec.layer_dims[1:])):
            activation = spec.output_activation if index == n_layers - 1 else spec.activation
            scale = np.sqrt(2.0 / (fan_in + fan_out))
            layers.append(
                Layer(
                    weight=rng.normal(0.0, scale, size=(fan_out, fan_in)),
                    bias=np.zeros(fan_out) if spec.use_bias else None,
                    activation=activation,
                )
            )
        return cls(layers)

    @classmethod
    def identity(cls, dim: int) -> "MLP":
        return cls([Layer(weight=np.eye(dim), bias=None, activation=Activation.LINEAR)])

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    @property
    def layer_dims(self) -> List[int]:
        return [self.input_dim] + [layer.out_dim for layer in self.layers]

    @property
    def has_bias(self) -> bool:
        return any(layer.bias is not None for layer in self.layers)

    def parameters(self) -> List[np.ndarray]:
        params = []
        for layer in self.layers:
            params.append(layer.weight)
            if layer.bias is not None:
                params.append(layer.bias)
        return params

    def copy(self) -> "MLP":
        return MLP(
            [
                Layer(
                    weight=layer.weight.copy(),
                    bias=None if layer.bias is None else layer.bias.copy(),
                    activation=layer.activation,
                )
                for layer in self.layers
            ]
        )

    def __call__(self, X: np.ndarray) -> np.ndarray:
        return mlp_forward(self, X)[0]


def flatten_grads(grads: List[LayerGrad]) -> List[np.ndarray]:
    """Gradients in the order of ``MLP.parameters()``."""
    flat = []
    for grad in grads:
        flat.append(grad.weight)
        if grad.bias is not None:
            flat.append(grad.bias)
    return flat


def mlp_forward(net: MLP, X: np.ndarray) -> Tuple[np.ndarray, Tape]:
    X = np.asarray(X, dtype=np.float64)
    squeeze = X.ndim == 1
    A = X.reshape(1, -1) if squeeze else X
    if A.shape[1] != net.input_dim:
        raise DimensionMismatch(f"network expects {net.input_dim} inputs, got {A.shape[1]}")

    tape = Tape(squeeze=squeeze)
    for layer in net.layers:
        tape.inputs.append(A)
        Z = A @ layer.weight.T
        if layer.bias is not None:
            Z = Z + layer.bias
        tape.preactivations.append(Z)
        A = layer.activation.apply(Z)
    return (A[0] if squeeze else A), tape


def mlp_backward(
    net: MLP,
    tape: Tape,
    output_grad: np.ndarray,
    return_input_grad: bool = False,
):
    """
    Gradients of sum(output_grad * output) with respect to every layer's
    parameters (and optionally the input), given the tape of the forward pass.
    """
    G = np.asarray(output_grad, dtype=np.float64)
    if tape.squeeze:
        G = G.reshape(1, -1)
    if G.shape != tape.preactivations[-1].shape:
        raise DimensionMismatch(
            f"output gradient shape {G.shape} does not match output shape {tape.preactivations[-1].shape}"
        )

    grads: List[LayerGrad] = [None] * len(net.layers)
    for index in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[index]
        delta = G * layer.activation.derivative(tape.preactivations[index])
        grads[index] = LayerGrad(
            weight=delta.T @ tape.inputs[index],
            bias=delta.sum(axis=0) if layer.bias is not None else None,
        )
        G = delta @ layer.weight

    if return_input_grad:
        return grads, (G[0] if tape.squeeze else G)
    return grads
