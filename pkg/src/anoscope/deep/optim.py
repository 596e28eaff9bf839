"""First-order optimizers updating numpy parameter arrays in place."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, List

import numpy as np

from src.anoscope.errors import InvalidConfig


class OptimizerKind(str, Enum):
    SGD = "sgd"
    ADAM = "adam"


@dataclass
class OptimizerSpec:
    kind: OptimizerKind = OptimizerKind.ADAM
    learning_rate: float = 1e-3
    batch_size: int = 128
    epochs: int = 100
    weight_decay: float = 0.0
    momentum: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self) -> None:
        self.kind = OptimizerKind(self.kind)
        if not self.learning_rate > 0:
            raise InvalidConfig(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.batch_size < 1:
            raise InvalidConfig(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 0:
            raise InvalidConfig(f"epochs must be >= 0, got {self.epochs}")
        if self.weight_decay < 0:
            raise InvalidConfig(f"weight_decay must be >= 0, got {self.weight_decay}")


class Optimizer:
    """
    Applies one update per ``step``. Weight decay enters as an L2 term added to
    every gradient.
    """

    def __init__(self, spec: OptimizerSpec, params: List[np.ndarray]):
        self.spec = spec
        self.params = params
        self.t = 0
        self._m = [np.zeros_like(p) for p in params]
        self._v = [np.zeros_like(p) for p in params]

    def step(self, grads: List[np.ndarray]) -> None:
        spec = self.spec
        self.t += 1
        for index, (param, grad) in enumerate(zip(self.params, grads)):
            if spec.weight_decay:
                grad = grad + spec.weight_decay * param
            if spec.kind == OptimizerKind.SGD:
                if spec.momentum:
                    self._m[index] = spec.momentum * self._m[index] + grad
                    grad = self._m[index]
                param -= spec.learning_rate * grad
                continue

            self._m[index] = spec.beta1 * self._m[index] + (1.0 - spec.beta1) * grad
            self._v[index] = spec.beta2 * self._v[index] + (1.0 - spec.beta2) * grad * grad
            m_hat = self._m[index] / (1.0 - spec.beta1**self.t)
            v_hat = self._v[index] / (1.0 - spec.beta2**self.t)
            param -= spec.learning_rate * m_hat / (np.sqrt(v_hat) + spec.eps)


def minibatches(n: int, batch_size: int, rng: np.random.Generator) -> Iterator[np.ndarray]:
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start : start + batch_size]
