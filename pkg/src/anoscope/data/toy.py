"""Synthetic datasets: the two-moons toy problem and a planted nuisance-feature set."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src.anoscope.core.types import Dataset, Label
from src.anoscope.data.contamination import UniformBox
from src.anoscope.errors import InvalidConfig

# anomalies for the toy benchmark are drawn uniformly over this box
TOY_BOUNDS = UniformBox(low=np.array([-3.0, -1.5]), high=np.array([3.0, 3.0]))


@dataclass
class TwoMoonsConfig:
    """
    A large upper half-circle (radius ``big_radius`` around the origin) and a
    small lower half-circle (radius ``small_radius`` around ``small_center``),
    each blurred by isotropic Gaussian noise. Noise sigmas default to a tenth
    of the respective radius.
    """

    n_train: int = 1000
    big_radius: float = 2.0
    small_radius: float = 0.6
    small_center: Tuple[float, float] = (1.5, 0.6)
    noise_sigma_big: Optional[float] = None
    noise_sigma_small: Optional[float] = None
    small_fraction: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.noise_sigma_big is None:
            self.noise_sigma_big = 0.1 * self.big_radius
        if self.noise_sigma_small is None:
            self.noise_sigma_small = 0.1 * self.small_radius
        if self.n_train < 1:
            raise InvalidConfig(f"n_train must be >= 1, got {self.n_train}")
        if not (self.big_radius > 0 and self.small_radius > 0):
            raise InvalidConfig("moon radii must be > 0")
        if self.noise_sigma_big < 0 or self.noise_sigma_small < 0:
            raise InvalidConfig("noise sigmas must be >= 0")
        if not 0.0 <= self.small_fraction <= 1.0:
            raise InvalidConfig(f"small_fraction must lie in [0, 1], got {self.small_fraction}")
        if len(self.small_center) != 2:
            raise InvalidConfig("small_center must be a 2-vector")
        self.small_center = tuple(float(v) for v in self.small_center)


def _arc(n: int, radius: float, center: np.ndarray, start: float, sigma: float, rng: np.random.Generator) -> np.ndarray:
    angles = rng.uniform(start, start + np.pi, size=n)
    points = center + radius * np.column_stack([np.cos(angles), np.sin(angles)])
    if sigma > 0:
        points = points + rng.normal(0.0, sigma, size=points.shape)
    return points


def gen_two_moons(cfg: TwoMoonsConfig, n: Optional[int] = None, seed: Optional[int] = None) -> Dataset:
    """``n`` unlabeled points (default cfg.n_train) drawn from the two arcs."""
    n = cfg.n_train if n is None else n
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    n_small = int(round(n * cfg.small_fraction))
    big = _arc(n - n_small, cfg.big_radius, np.zeros(2), 0.0, cfg.noise_sigma_big, rng)
    small = _arc(n_small, cfg.small_radius, np.asarray(cfg.small_center), np.pi, cfg.noise_sigma_small, rng)
    return Dataset(np.vstack([big, small]), feature_names=["x1", "x2"])


def sample_uniform_anomalies(bounds: UniformBox, m: int, seed: int = 0) -> Dataset:
    """``m`` points i.i.d. uniform over ``bounds``, labeled Anomaly."""
    if m < 1:
        raise InvalidConfig(f"need at least one anomaly, got m={m}")
    rows = bounds.sample(m, np.random.default_rng(seed))
    return Dataset(rows, np.full(m, int(Label.ANOMALY)))


def gen_nuisance_dataset(
    n_train: int = 500,
    n_test_normal: int = 200,
    n_test_anomaly: int = 50,
    seed: int = 0,
    shift: float = 2.0,
    stripe: float = 1.5,
    spread: float = 0.5,
) -> Tuple[Dataset, Dataset, np.ndarray]:
    """
    Four features: two signal dimensions and two nuisance dimensions.

    Normal rows are isotropic Gaussian. Each test anomaly is shifted by ``shift``
    along one signal dimension and additionally carries a +/- ``stripe`` pattern
    across the nuisance dimensions, which correlates with the label without
    being its cause. The returned (n_test, 4) mask marks the shifted signal
    dimension of every anomaly (all zeros for normal rows).
    """
    rng = np.random.default_rng(seed)
    dim = 4
    train = rng.normal(0.0, spread, size=(n_train, dim))
    normal = rng.normal(0.0, spread, size=(n_test_normal, dim))

    anomalies = rng.normal(0.0, spread, size=(n_test_anomaly, dim))
    signal_dim = rng.integers(0, 2, size=n_test_anomaly)
    direction = rng.choice([-1.0, 1.0], size=n_test_anomaly)
    anomalies[np.arange(n_test_anomaly), signal_dim] += direction * shift
    polarity = rng.choice([-1.0, 1.0], size=n_test_anomaly)
    anomalies[:, 2] += polarity * stripe
    anomalies[:, 3] -= polarity * stripe

    masks = np.zeros((n_test_normal + n_test_anomaly, dim))
    masks[n_test_normal + np.arange(n_test_anomaly), signal_dim] = 1.0

    names = ["signal1", "signal2", "nuisance1", "nuisance2"]
    labels = np.concatenate([np.full(n_test_normal, int(Label.NORMAL)), np.full(n_test_anomaly, int(Label.ANOMALY))])
    return Dataset(train, feature_names=names), Dataset(np.vstack([normal, anomalies]), labels, names), masks
