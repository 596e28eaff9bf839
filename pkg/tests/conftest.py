import numpy as np
import pytest

from src.anoscope.core.types import Dataset, Label
from src.anoscope.data.toy import TOY_BOUNDS, TwoMoonsConfig, gen_two_moons, sample_uniform_anomalies


@pytest.fixture
def blob():
    """200 rows of a correlated 3-d Gaussian, unlabeled."""
    rng = np.random.default_rng(11)
    cov = np.array([[2.0, 0.6, 0.0], [0.6, 1.0, 0.2], [0.0, 0.2, 0.5]])
    return Dataset(rng.multivariate_normal(np.zeros(3), cov, size=200))


@pytest.fixture
def moons():
    return gen_two_moons(TwoMoonsConfig(n_train=300), seed=3)


@pytest.fixture
def moons_test():
    """Held-out moons (Normal) followed by uniform anomalies over the toy box."""
    normal = gen_two_moons(TwoMoonsConfig(), n=200, seed=4)
    normal = Dataset(normal.rows, np.full(normal.n, int(Label.NORMAL)), normal.feature_names)
    anomalies = sample_uniform_anomalies(TOY_BOUNDS, 100, seed=5)
    return Dataset.concat([normal, anomalies])


@pytest.fixture
def separable():
    """A tight cluster at the origin plus labeled far-away anomalies."""
    rng = np.random.default_rng(2)
    normal = rng.normal(0.0, 0.3, size=(60, 2))
    anomalies = rng.normal(0.0, 0.3, size=(12, 2)) + np.array([6.0, 6.0])
    labels = np.concatenate([np.full(60, int(Label.NORMAL)), np.full(12, int(Label.ANOMALY))])
    return Dataset(np.vstack([normal, anomalies]), labels)
