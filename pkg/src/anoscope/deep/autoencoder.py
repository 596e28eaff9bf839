"""Autoencoder detector scoring by squared reconstruction error."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import ClassVar, List, Optional

import numpy as np

from src.anoscope.core.dimensions import ModelFamily
from src.anoscope.core.types import Dataset
from src.anoscope.data.splits import holdout_split
from src.anoscope.deep.mlp import MLP, MLPSpec, flatten_grads, mlp_backward, mlp_forward
from src.anoscope.deep.optim import Optimizer, OptimizerSpec, minibatches
from src.anoscope.errors import Diverged, InvalidConfig
from src.anoscope.models.base import BaseDetector
from src.utils.logging import get_logger

logger = get_logger(__name__)


@dataclass
class AEModel(BaseDetector):
    encoder: MLP
    decoder: MLP
    best_epoch: int = 0
    train_loss_history: List[float] = field(default_factory=list)
    holdout_loss_history: List[float] = field(default_factory=list)

    family: ClassVar[ModelFamily] = ModelFamily.AUTOENCODER

    @property
    def n_features(self) -> int:
        return self.encoder.input_dim

    @property
    def bottleneck(self) -> int:
        return self.encoder.output_dim

    def encode(self, X: np.ndarray) -> np.ndarray:
        return self.encoder(X)

    def reconstruct(self, X: np.ndarray) -> np.ndarray:
        return self.decoder(self.encoder(X))

    def _score_rows(self, X: np.ndarray) -> np.ndarray:
        residual = X - self.reconstruct(X)
        return np.einsum("ij,ij->i", residual, residual)


def decoder_spec(spec: MLPSpec) -> MLPSpec:
    """Mirror of the encoder topology, seeded differently."""
    return MLPSpec(
        layer_dims=list(reversed(spec.layer_dims)),
        activation=spec.activation,
        use_bias=spec.use_bias,
        seed=spec.seed + 1,
        output_activation=spec.output_activation,
    )


def _reconstruction_loss(encoder: MLP, decoder: MLP, X: np.ndarray) -> float:
    residual = X - decoder(encoder(X))
    return float(np.mean(np.einsum("ij,ij->i", residual, residual)))


def fit_autoencoder(
    train: Dataset,
    spec: MLPSpec,
    opt: OptimizerSpec,
    holdout: Optional[Dataset] = None,
    holdout_fraction: float = 0.1,
    seed: int = 0,
) -> AEModel:
    """
    Minimize mean ||x - decode(encode(x))||^2 and keep the weights of the epoch
    with the lowest hold-out reconstruction error. Without an explicit hold-out,
    ``holdout_fraction`` of the training rows is set aside.
    """
    if spec.layer_dims[0] != train.dim:
        raise InvalidConfig(f"encoder input dim {spec.layer_dims[0]} does not match data dim {train.dim}")
    if spec.layer_dims[-1] > train.dim:
        raise InvalidConfig(f"bottleneck {spec.layer_dims[-1]} exceeds input dim {train.dim}")

    if holdout is None:
        train, holdout = holdout_split(train, holdout_fraction, seed)
    X, X_holdout = train.rows, holdout.rows

    encoder = MLP.from_spec(spec)
    decoder = MLP.from_spec(decoder_spec(spec))
    optimizer = Optimizer(opt, encoder.parameters() + decoder.parameters())
    rng = np.random.default_rng(seed)

    best_loss = _reconstruction_loss(encoder, decoder, X_holdout)
    best = (encoder.copy(), decoder.copy(), 0)
    train_history: List[float] = []
    holdout_history: List[float] = [best_loss]

    for epoch in range(1, opt.epochs + 1):
        epoch_loss = 0.0
        for batch in minibatches(X.shape[0], opt.batch_size, rng):
            Xb = X[batch]
            code, enc_tape = mlp_forward(encoder, Xb)
            recon, dec_tape = mlp_forward(decoder, code)
            residual = recon - Xb
            loss = float(np.mean(np.einsum("ij,ij->i", residual, residual)))
            if not np.isfinite(loss):
                raise Diverged(epoch, loss)
            epoch_loss += loss * Xb.shape[0]

            dec_grads, code_grad = mlp_backward(decoder, dec_tape, 2.0 * residual / Xb.shape[0], return_input_grad=True)
            enc_grads = mlp_backward(encoder, enc_tape, code_grad)
            optimizer.step(flatten_grads(enc_grads) + flatten_grads(dec_grads))

        train_history.append(epoch_loss / X.shape[0])
        holdout_loss = _reconstruction_loss(encoder, decoder, X_holdout)
        if not np.isfinite(holdout_loss):
            raise Diverged(epoch, holdout_loss)
        holdout_history.append(holdout_loss)
        if holdout_loss < best_loss:
            best_loss = holdout_loss
            best = (encoder.copy(), decoder.copy(), epoch)
        logger.debug(f"AE epoch {epoch}: train {train_history[-1]:.6g}, hold-out {holdout_loss:.6g}")

    best_encoder, best_decoder, best_epoch = best
    logger.info(
        f"fitted autoencoder {spec.layer_dims} on {X.shape[0]} rows: best hold-out loss {best_loss:.6g} "
        f"at epoch {best_epoch}/{opt.epochs}"
    )
    return AEModel(
        encoder=best_encoder,
        decoder=best_decoder,
        best_epoch=best_epoch,
        train_loss_history=train_history,
        holdout_loss_history=holdout_history,
    )
