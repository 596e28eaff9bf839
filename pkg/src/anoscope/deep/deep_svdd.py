"""Deep SVDD: a bias-free network mapping the data close to a fixed center."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, ClassVar, List, Optional, Union

import numpy as np

from src.anoscope.core.dimensions import ModelFamily
from src.anoscope.core.losses import SAD_DISTANCE_FLOOR
from src.anoscope.core.types import Dataset, Label
from src.anoscope.deep.mlp import MLP, MLPSpec, flatten_grads, mlp_backward, mlp_forward
from src.anoscope.deep.optim import Optimizer, OptimizerSpec, minibatches
from src.anoscope.errors import BiasTermsForbidden, CollapseDetected, Diverged, InvalidConfig, InvalidNu, UnlabeledInput
from src.anoscope.models.base import BaseDetector, as_matrix
from src.utils.logging import get_logger

logger = get_logger(__name__)

COLLAPSE_TOLERANCE = 1e-6


class DeepSVDDVariant(str, Enum):
    ONE_CLASS = "one_class"
    SOFT_BOUNDARY = "soft_boundary"
    SAD = "sad"


@dataclass
class DeepSVDDModel(BaseDetector):
    """
    score(x) = ||phi(x) - c||^2, minus R^2 for the soft-boundary variant (which
    then carries an intrinsic boundary).
    """

    network: MLP
    center: np.ndarray
    variant: DeepSVDDVariant = DeepSVDDVariant.ONE_CLASS
    radius2: float = 0.0
    nu: float = 0.1
    eta: float = 1.0
    loss_history: List[float] = field(default_factory=list)
    variance_history: List[float] = field(default_factory=list)
    radius2_history: List[float] = field(default_factory=list)

    family: ClassVar[ModelFamily] = ModelFamily.HYPERSPHERE

    @property
    def has_intrinsic_boundary(self) -> bool:
        return self.variant == DeepSVDDVariant.SOFT_BOUNDARY

    @property
    def n_features(self) -> int:
        return self.network.input_dim

    def embed(self, X: np.ndarray) -> np.ndarray:
        return self.network(X)

    def distance2(self, X: np.ndarray) -> np.ndarray:
        diff = self.network(X) - self.center
        return np.einsum("ij,ij->i", diff, diff)

    def _score_rows(self, X: np.ndarray) -> np.ndarray:
        distances = self.distance2(X)
        if self.variant == DeepSVDDVariant.SOFT_BOUNDARY:
            return distances - self.radius2
        return distances


def embedding_variance(model: Union[DeepSVDDModel, MLP], data: Union[Dataset, np.ndarray]) -> float:
    """Mean per-dimension variance of the embeddings of ``data``."""
    network = model.network if isinstance(model, DeepSVDDModel) else model
    return float(np.mean(np.var(network(as_matrix(data)), axis=0)))


def initial_center(embeddings: np.ndarray, eps: float = 0.0) -> np.ndarray:
    """
    Mean of the initial embeddings. With ``eps > 0``, coordinates closer to zero
    than ``eps`` are pushed out to +/- eps.
    """
    center = embeddings.mean(axis=0)
    if eps <= 0.0:
        return center
    small = np.abs(center) < eps
    center[small & (center < 0)] = -eps
    center[small & (center >= 0)] = eps
    return center


def _radius2_quantile(distances: np.ndarray, nu: float) -> float:
    return float(np.quantile(distances, 1.0 - nu))


def fit_deep_svdd(
    train: Dataset,
    spec: Optional[MLPSpec],
    opt: OptimizerSpec,
    variant: DeepSVDDVariant = DeepSVDDVariant.ONE_CLASS,
    labeled: Optional[Dataset] = None,
    nu: float = 0.1,
    eta: float = 1.0,
    network: Optional[MLP] = None,
    callback: Optional[Callable[[int, DeepSVDDModel], None]] = None,
    center_eps: float = 0.0,
    collapse_tol: float = COLLAPSE_TOLERANCE,
    seed: int = 0,
) -> DeepSVDDModel:
    """
    Train phi so the data concentrates around the center c (mean initial
    embedding, frozen afterwards).

    ONE_CLASS      mean ||phi(x) - c||^2
    SOFT_BOUNDARY  R^2 + 1/(nu n) sum max(0, ||phi(x) - c||^2 - R^2), R^2 reset to
                   the (1 - nu)-quantile of training distances after every epoch
    SAD            unlabeled and labeled-normal distances plus eta-weighted inverse
                   distances of labeled anomalies

    ``network`` replaces the network built from ``spec``; ``callback`` runs after
    every epoch. ``center_eps`` > 0 keeps every center coordinate at least that
    far from zero. Training aborts with CollapseDetected once the embedding
    variance falls below ``collapse_tol`` times its initial value.
    """
    variant = DeepSVDDVariant(variant)
    if network is None:
        if spec is None:
            raise InvalidConfig("Deep SVDD needs a network spec or an initial network")
        if spec.use_bias:
            raise BiasTermsForbidden("Deep SVDD networks must not use bias terms")
        if spec.layer_dims[0] != train.dim:
            raise InvalidConfig(f"network input dim {spec.layer_dims[0]} does not match data dim {train.dim}")
        network = MLP.from_spec(spec)
    else:
        network = network.copy()
    if network.has_bias:
        raise BiasTermsForbidden("Deep SVDD networks must not use bias terms")
    if variant == DeepSVDDVariant.SOFT_BOUNDARY and not 0.0 < nu <= 1.0:
        raise InvalidNu(f"nu must lie in (0, 1], got {nu}")

    X = train.rows
    n = X.shape[0]
    signs = np.ones(n)
    weights = np.ones(n)
    if variant == DeepSVDDVariant.SAD:
        known = None if labeled is None else labeled.labels != int(Label.UNLABELED)
        if known is None or not np.any(known):
            raise UnlabeledInput("Deep SAD needs labeled points")
        X = np.vstack([X, labeled.rows[known]])
        signs = np.concatenate([signs, labeled.labels[known].astype(np.float64)])
        weights = np.concatenate([weights, np.full(int(known.sum()), float(eta))])

    initial_embeddings = network(train.rows)
    model = DeepSVDDModel(
        network=network,
        center=initial_center(initial_embeddings, center_eps),
        variant=variant,
        nu=float(nu),
        eta=float(eta),
    )
    initial_variance = float(np.mean(np.var(initial_embeddings, axis=0)))
    if variant == DeepSVDDVariant.SOFT_BOUNDARY:
        model.radius2 = _radius2_quantile(model.distance2(train.rows), nu)

    optimizer = Optimizer(opt, network.parameters())
    rng = np.random.default_rng(seed)
    for epoch in range(1, opt.epochs + 1):
        epoch_loss = 0.0
        for batch in minibatches(X.shape[0], opt.batch_size, rng):
            out, tape = mlp_forward(network, X[batch])
            diff = out - model.center
            dist2 = np.einsum("ij,ij->i", diff, diff)
            m = batch.shape[0]

            if variant == DeepSVDDVariant.SOFT_BOUNDARY:
                excess = dist2 - model.radius2
                loss = model.radius2 + np.sum(np.maximum(excess, 0.0)) / (nu * m)
                coeff = (excess > 0) / (nu * m)
            elif variant == DeepSVDDVariant.SAD:
                sign, weight = signs[batch], weights[batch]
                floored = np.maximum(dist2, SAD_DISTANCE_FLOOR)
                terms = np.where(sign > 0, dist2, 1.0 / floored)
                loss = np.sum(weight * terms) / m
                # d/d(dist2) of dist2^-1 is -dist2^-2, zero where the floor is active
                inverse_slope = np.where(dist2 > SAD_DISTANCE_FLOOR, -1.0 / floored**2, 0.0)
                coeff = weight * np.where(sign > 0, 1.0, inverse_slope) / m
            else:
                loss = np.mean(dist2)
                coeff = np.full(m, 1.0 / m)

            loss = float(loss)
            if not np.isfinite(loss):
                raise Diverged(epoch, loss)
            epoch_loss += loss * m
            grads = mlp_backward(network, tape, 2.0 * coeff[:, None] * diff)
            optimizer.step(flatten_grads(grads))

        train_distances = model.distance2(train.rows)
        if not np.all(np.isfinite(train_distances)):
            raise Diverged(epoch, float("nan"))
        if variant == DeepSVDDVariant.SOFT_BOUNDARY:
            model.radius2 = _radius2_quantile(train_distances, nu)
            model.radius2_history.append(model.radius2)
        model.loss_history.append(epoch_loss / X.shape[0])
        variance = embedding_variance(network, train.rows)
        model.variance_history.append(variance)
        logger.debug(f"Deep SVDD epoch {epoch}: loss {model.loss_history[-1]:.6g}, embedding variance {variance:.3e}")

        if callback is not None:
            callback(epoch, model)
        if variance < collapse_tol * initial_variance:
            raise CollapseDetected(epoch, variance, initial_variance)

    logger.info(
        f"fitted Deep SVDD ({variant.value}) {network.layer_dims} on {n} rows over {opt.epochs} epochs"
        + (f", final loss {model.loss_history[-1]:.6g}" if model.loss_history else "")
    )
    return model
