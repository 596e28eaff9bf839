import numpy as np
import pytest
from scipy.integrate import trapezoid
from scipy.stats import multivariate_normal

from src.anoscope.core.types import Dataset
from src.anoscope.errors import (
    DegenerateComponent,
    InvalidConfig,
    NonPositiveGamma,
    TooFewSamples,
    UnsupportedCombination,
)
from src.anoscope.evaluation.metrics import LabeledScores, auroc
from src.anoscope.kernels import linear_kernel, mahalanobis_kernel, rbf_kernel
from src.anoscope.models.gaussian import fit_gaussian
from src.anoscope.models.gmm import GMMScoring, _m_step, fit_gmm
from src.anoscope.models.kde import fit_kde, select_bandwidth
from src.anoscope.models.ppca import fit_ppca

SQUARE = Dataset(np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0], [2.0, 2.0]]))


def test_gaussian_moments():
    model = fit_gaussian(SQUARE)
    np.testing.assert_allclose(model.mean, [1.0, 1.0])
    np.testing.assert_allclose(model.covariance, np.eye(2), atol=1e-12)
    assert model.score([1.0, 1.0]) == pytest.approx(0.0, abs=1e-12)
    assert model.score([3.0, 1.0]) == pytest.approx(4.0)


def test_gaussian_neg_log_likelihood(blob):
    model = fit_gaussian(blob)
    X = blob.rows[:10]
    expected = -multivariate_normal(model.mean, model.covariance).logpdf(X)
    np.testing.assert_allclose(model.neg_log_likelihood(X), expected, rtol=1e-10)
    assert model.neg_log_likelihood(model.mean)[0] < model.neg_log_likelihood(model.mean + 3.0)[0]


def test_gaussian_needs_two_rows():
    with pytest.raises(TooFewSamples):
        fit_gaussian(Dataset(np.array([[1.0, 2.0]])))


def test_gaussian_scores_invariant_under_rotation(blob):
    q, _ = np.linalg.qr(np.random.default_rng(11).normal(size=(3, 3)))
    queries = np.random.default_rng(12).normal(0.0, 2.0, size=(25, 3))
    base = fit_gaussian(blob).score_batch(queries)
    rotated = fit_gaussian(Dataset(blob.rows @ q.T)).score_batch(queries @ q.T)
    np.testing.assert_allclose(rotated, base, rtol=1e-9)


def test_gmm_single_component_is_gaussian(blob):
    gmm = fit_gmm(blob, k=1, seed=0)
    gaussian = fit_gaussian(blob)
    np.testing.assert_allclose(gmm.means[0], gaussian.mean, atol=1e-12)
    np.testing.assert_allclose(gmm.covariances[0], gaussian.covariance, atol=1e-10)
    assert gmm.weights[0] == pytest.approx(1.0)


def test_gmm_separated_clusters():
    data = Dataset(np.array([[0.0], [1.0], [100.0], [101.0]]))
    model = fit_gmm(data, k=2, seed=0)
    np.testing.assert_allclose(np.sort(model.means[:, 0]), [0.5, 100.5], atol=1e-9)
    np.testing.assert_allclose(model.weights, [0.5, 0.5], atol=1e-9)


def test_gmm_log_likelihood_is_monotone(moons):
    model = fit_gmm(moons, k=4, seed=1, max_iter=50)
    history = np.asarray(model.log_likelihood_history)
    assert np.all(np.diff(history) >= -1e-10)


def test_gmm_prototype_scoring(moons):
    nll = fit_gmm(moons, k=3, seed=2)
    proto = fit_gmm(moons, k=3, seed=2, scoring=GMMScoring.PROTOTYPE)
    far = np.array([[10.0, 10.0]])
    assert proto.score(far) > proto.score(moons.rows[0])
    assert nll.score(far) > nll.score(moons.rows[0])


def test_gmm_rejects_bad_k(blob):
    with pytest.raises(InvalidConfig):
        fit_gmm(blob, k=0)
    with pytest.raises(TooFewSamples):
        fit_gmm(Dataset(np.zeros((2, 1)) + [[0.0], [1.0]]), k=3)


def test_gmm_m_step_floors_collapsed_component():
    X = np.array([[1.0, 2.0], [1.0, 2.0], [1.0, 2.0], [0.0, 0.0], [3.0, 1.0], [-2.0, 4.0]])
    resp = np.zeros((6, 2))
    resp[:3, 0] = 1.0
    resp[3:, 1] = 1.0
    _, means, covariances, _, _ = _m_step(X, resp, floor=0.01)
    np.testing.assert_allclose(means[0], [1.0, 2.0])
    np.testing.assert_allclose(covariances[0], 0.01 * np.eye(2), atol=1e-15)

    resp[:, 0], resp[:, 1] = 1.0, 0.0
    with pytest.raises(DegenerateComponent):
        _m_step(X, resp, floor=0.01)


def test_kde_single_point():
    model = fit_kde(Dataset(np.array([[0.3, -0.2]])), gamma=1.0)
    assert model.score([0.3, -0.2]) == pytest.approx(0.0, abs=1e-12)


def test_kde_midpoint_oracle():
    model = fit_kde(Dataset(np.array([[0.0, 0.0], [1.0, 0.0]])), gamma=1.0)
    assert model.score([0.5, 0.0]) == pytest.approx(0.25)


def test_kde_log_density_integrates_to_one():
    model = fit_kde(Dataset(np.array([[0.0], [1.5]])), gamma=2.0)
    grid = np.linspace(-8.0, 10.0, 20001)[:, None]
    density = np.exp(model.log_density(grid))
    assert trapezoid(density, grid[:, 0]) == pytest.approx(1.0, abs=1e-6)


def test_kde_mahalanobis_identity_matches_rbf(blob):
    rbf = fit_kde(blob, kernel=rbf_kernel(0.7))
    mahalanobis = fit_kde(blob, kernel=mahalanobis_kernel(np.eye(3), gamma=0.7))
    probes = blob.rows[:20] + 0.1
    np.testing.assert_allclose(rbf.score_batch(probes), mahalanobis.score_batch(probes), rtol=1e-10)


def test_kde_rejects_bad_kernels(blob):
    with pytest.raises(UnsupportedCombination):
        fit_kde(blob, kernel=linear_kernel())
    with pytest.raises(NonPositiveGamma):
        fit_kde(blob, gamma=-1.0)
    with pytest.raises(NonPositiveGamma):
        fit_kde(blob)


def test_select_bandwidth_picks_from_grid(moons):
    fit_part, holdout = Dataset(moons.rows[:250]), Dataset(moons.rows[250:])
    grid = [0.01, 1.0, 5.0, 1000.0]
    gamma = select_bandwidth(fit_part, holdout, grid=grid)
    assert gamma in grid
    assert gamma != 0.01


def test_kde_beats_gaussian_on_moons(moons, moons_test):
    kde = fit_kde(moons, gamma=select_bandwidth(Dataset(moons.rows[:250]), Dataset(moons.rows[250:])))
    gaussian = fit_gaussian(moons)
    kde_auc = auroc(LabeledScores.from_dataset(kde.score_batch(moons_test), moons_test))
    gaussian_auc = auroc(LabeledScores.from_dataset(gaussian.score_batch(moons_test), moons_test))
    assert kde_auc > gaussian_auc


def test_ppca_closed_form():
    # sample covariance diag(2, 1)
    data = Dataset(np.array([[2.0, 0.0], [-2.0, 0.0], [0.0, np.sqrt(2.0)], [0.0, -np.sqrt(2.0)]]))
    model = fit_ppca(data, d=1)
    np.testing.assert_allclose(np.abs(model.W), [[1.0, 0.0]], atol=1e-12)
    assert model.sigma2 == pytest.approx(1.0)
    np.testing.assert_allclose(model.covariance, np.diag([2.0, 1.0]), atol=1e-12)


def test_ppca_nll_matches_dense_gaussian(blob):
    model = fit_ppca(blob, d=2)
    dense = multivariate_normal(model.mean, model.W.T @ model.W + model.sigma2 * np.eye(3))
    np.testing.assert_allclose(model.score_batch(blob.rows[:15]), -dense.logpdf(blob.rows[:15]), rtol=1e-10)


def test_ppca_residual_variance_is_discarded_eigenvalue(blob):
    model = fit_ppca(blob, d=2)
    centered = blob.rows - blob.rows.mean(axis=0)
    eigvals = np.linalg.eigvalsh(centered.T @ centered / blob.n)
    assert model.sigma2 == pytest.approx(eigvals[0])
    assert model.latent_dim == 2


def test_ppca_rejects_bad_latent_dim(blob):
    with pytest.raises(InvalidConfig):
        fit_ppca(blob, d=0)
    with pytest.raises(InvalidConfig):
        fit_ppca(blob, d=3)
