import numpy as np
import pytest

from src.anoscope.core.types import Dataset
from src.anoscope.errors import InvalidConfig, NonPositiveGamma, TooFewSamples
from src.anoscope.evaluation.metrics import LabeledScores, auroc
from src.anoscope.kernels import linear_kernel, median_heuristic_gamma, nearest_half_mass_share
from src.anoscope.models.kpca import fit_kpca, kpca_score, neighbor_similarity_gamma
from src.anoscope.models.pca import PCASolver, fit_pca
from src.anoscope.models.vq import VQNorm, fit_vq

DIAGONAL = Dataset(np.array([[-2.0, -2.0], [-1.0, -1.0], [0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]))


@pytest.mark.parametrize("solver", [PCASolver.EIGH, PCASolver.SVD])
def test_pca_on_a_line(solver):
    model = fit_pca(DIAGONAL, variance_fraction=0.9, solver=solver)
    assert model.n_components == 1
    np.testing.assert_allclose(np.abs(model.components[0]), [1 / np.sqrt(2), 1 / np.sqrt(2)], atol=1e-12)
    np.testing.assert_allclose(model.score_batch(DIAGONAL), 0.0, atol=1e-20)
    assert model.score([1.0, -1.0]) == pytest.approx(2.0)


def test_pca_solvers_agree(blob):
    eigh = fit_pca(blob, n_components=2, solver=PCASolver.EIGH)
    svd = fit_pca(blob, n_components=2, solver=PCASolver.SVD)
    np.testing.assert_allclose(eigh.projector(), svd.projector(), atol=1e-10)
    np.testing.assert_allclose(eigh.explained_variance, svd.explained_variance, rtol=1e-10)


def test_pca_full_variance_reconstructs_exactly(blob):
    model = fit_pca(blob, variance_fraction=1.0)
    assert model.n_components == 3
    np.testing.assert_allclose(model.score_batch(blob), 0.0, atol=1e-20)


def test_pca_rejects_bad_settings(blob):
    with pytest.raises(InvalidConfig):
        fit_pca(blob, variance_fraction=0.0)
    with pytest.raises(InvalidConfig):
        fit_pca(blob, n_components=4)
    with pytest.raises(TooFewSamples):
        fit_pca(Dataset(np.ones((1, 2))))


def test_linear_kpca_matches_pca():
    rng = np.random.default_rng(3)
    for _ in range(5):
        train = Dataset(rng.normal(size=(10, 3)))
        probes = rng.normal(size=(6, 3))
        pca = fit_pca(train, n_components=2)
        kpca = fit_kpca(train, kernel=linear_kernel(), n_components=2)
        np.testing.assert_allclose(kpca.score_batch(probes), pca.score_batch(probes), atol=1e-8)


def test_kpca_full_rank_reconstructs_training_points(moons):
    train = Dataset(moons.rows[:40])
    model = fit_kpca(train, variance_fraction=1.0)
    np.testing.assert_allclose(model.score_batch(train), 0.0, atol=1e-6)
    assert kpca_score(model, train.rows[0]) == pytest.approx(0.0, abs=1e-6)


def test_kpca_default_width_is_neighbor_heuristic(moons):
    model = fit_kpca(moons)
    assert model.kernel.gamma == pytest.approx(neighbor_similarity_gamma(moons))
    assert model.kernel.gamma == pytest.approx(median_heuristic_gamma(moons.rows))


def test_neighbor_heuristic_half_of_pairs_reach_half_similarity(moons):
    gamma = neighbor_similarity_gamma(moons)
    sq = ((moons.rows[:, None, :] - moons.rows[None, :, :]) ** 2).sum(-1)
    pairs = sq[np.triu_indices(moons.n, k=1)]
    assert np.mean(np.exp(-gamma * pairs) >= 0.5) == pytest.approx(0.5, abs=0.01)


def test_neighbor_heuristic_median_pair_has_half_similarity(moons):
    gamma = neighbor_similarity_gamma(moons)
    sq = ((moons.rows[:, None, :] - moons.rows[None, :, :]) ** 2).sum(-1)
    median = np.median(sq[np.triu_indices(moons.n, k=1)])
    assert np.exp(-gamma * median) == pytest.approx(0.5)


def test_nearest_half_mass_share_grows_with_gamma(moons):
    m = (moons.n - 1) // 2
    assert nearest_half_mass_share(moons.rows, 1e-9) == pytest.approx(m / (moons.n - 1), abs=1e-6)
    shares = [nearest_half_mass_share(moons.rows, g) for g in np.geomspace(1e-3, 50.0, 12)]
    assert np.all(np.diff(shares) >= -1e-12)
    assert shares[-1] > 0.95
    assert nearest_half_mass_share(moons.rows, neighbor_similarity_gamma(moons)) > 0.5


def test_nearest_half_mass_share_is_one_half_only_in_the_flat_limit():
    # odd n: the share starts at exactly 1/2 and climbs for any gamma > 0
    assert nearest_half_mass_share(DIAGONAL.rows, 1e-12) == pytest.approx(0.5, abs=1e-9)
    assert nearest_half_mass_share(DIAGONAL.rows, 0.1) > 0.5


def test_nearest_half_mass_share_errors():
    with pytest.raises(TooFewSamples):
        nearest_half_mass_share(np.zeros((2, 2)), 1.0)
    with pytest.raises(NonPositiveGamma):
        nearest_half_mass_share(DIAGONAL.rows, 0.0)


def test_kpca_beats_pca_on_moons(moons, moons_test):
    pca = fit_pca(moons, n_components=1)
    kpca = fit_kpca(moons)
    pca_auc = auroc(LabeledScores.from_dataset(pca.score_batch(moons_test), moons_test))
    kpca_auc = auroc(LabeledScores.from_dataset(kpca.score_batch(moons_test), moons_test))
    assert kpca_auc > pca_auc


def test_kpca_scores_are_non_negative(moons, moons_test):
    model = fit_kpca(moons, n_components=5)
    assert np.all(model.score_batch(moons_test) >= 0.0)


def test_kmeans_single_prototype_is_mean(blob):
    model = fit_vq(blob, k=1)
    np.testing.assert_allclose(model.prototypes[0], blob.rows.mean(axis=0), atol=1e-12)


@pytest.mark.parametrize("norm", [VQNorm.L2, VQNorm.L1])
def test_vq_two_pairs(norm):
    data = Dataset(np.array([[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]]))
    model = fit_vq(data, k=2, norm=norm, seed=0)
    prototypes = model.prototypes[np.argsort(model.prototypes[:, 0])]
    np.testing.assert_allclose(prototypes, [[0.0, 0.5], [10.0, 0.5]])
    assert model.assign(np.array([[9.0, 0.0]]))[0] == model.assign(np.array([[10.0, 1.0]]))[0]


def test_kmedians_scores_l1_distance():
    data = Dataset(np.array([[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]]))
    model = fit_vq(data, k=2, norm=VQNorm.L1, seed=0)
    assert model.score([1.0, 2.5]) == pytest.approx(3.0)


def test_vq_k_equals_n_scores_training_points_zero():
    data = Dataset(np.random.default_rng(4).normal(size=(6, 2)))
    model = fit_vq(data, k=6, seed=1)
    np.testing.assert_allclose(model.score_batch(data), 0.0, atol=1e-24)


def test_vq_objective_is_non_increasing(moons):
    model = fit_vq(moons, k=5, seed=3, n_init=1)
    assert np.all(np.diff(model.objective_history) <= 1e-12)


def test_vq_rejects_bad_k(blob):
    with pytest.raises(InvalidConfig):
        fit_vq(blob, k=0)
    with pytest.raises(TooFewSamples):
        fit_vq(Dataset(np.ones((2, 2))), k=3)
