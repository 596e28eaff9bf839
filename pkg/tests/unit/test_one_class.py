import numpy as np
import pytest
from scipy.optimize import brentq
from scipy.stats import spearmanr

from src.anoscope.core.types import Dataset, Label
from src.anoscope.errors import InvalidNu, NoLabeledValidation
from src.anoscope.evaluation.metrics import LabeledScores, auroc
from src.anoscope.kernels import median_heuristic_gamma, rbf_kernel
from src.anoscope.models.dual import dual_objective, solve_one_class_dual
from src.anoscope.models.mve import fit_mve
from src.anoscope.models.ocsvm import fit_ocsvm
from src.anoscope.models.selection import DEFAULT_NU_GRID, SelectionMethod, select_nu_and_gamma
from src.anoscope.models.svdd import BOUND_TOLERANCE, fit_semi_supervised_svdd, fit_svdd

# KKT tolerance of the dual solver shows up as this much slack in scores
SCORE_SLACK = 1e-5


def _project_capped_simplex(v: np.ndarray, upper: float) -> np.ndarray:
    def excess(theta):
        return np.clip(v - theta, 0.0, upper).sum() - 1.0

    theta = brentq(excess, v.min() - upper - 1.0, v.max() + 1.0, xtol=1e-15)
    return np.clip(v - theta, 0.0, upper)


def _projected_gradient_oracle(K: np.ndarray, linear: np.ndarray, upper: float, steps: int = 5000) -> np.ndarray:
    step = 1.0 / np.linalg.eigvalsh(K)[-1]
    alphas = np.full(K.shape[0], 1.0 / K.shape[0])
    for _ in range(steps):
        alphas = _project_capped_simplex(alphas - step * (K @ alphas + linear), upper)
    return alphas


@pytest.fixture
def five_points():
    return Dataset(np.array([[0.0, 0.0], [1.5, 0.2], [-0.4, 1.3], [0.8, -1.1], [-1.2, -0.7]]))


def test_mve_excludes_planted_outlier():
    rng = np.random.default_rng(0)
    rows = np.vstack([rng.normal(0.0, 0.5, size=(9, 2)), [[25.0, -25.0]]])
    model = fit_mve(Dataset(rows), support_fraction=0.9, contamination=0.01, seed=0)
    assert 9 not in model.support_indices.tolist()
    assert model.score(rows[9]) > 0
    history = np.asarray(model.log_det_history)
    assert np.all(np.diff(history) <= 0)


def test_mve_has_intrinsic_boundary(blob):
    model = fit_mve(blob, seed=1)
    assert model.contamination == 0.01
    values = model.decision_function(blob)
    assert np.mean(values > 0) < 0.2
    assert model.decision_function(np.array([[30.0, 30.0, 30.0]]))[0] > 0


def test_dual_solver_matches_oracle(five_points):
    K = rbf_kernel(1.0)(five_points.rows)
    linear = np.array([0.1, -0.2, 0.0, 0.3, -0.1])
    solution = solve_one_class_dual(K, linear, upper=0.4)
    oracle = _projected_gradient_oracle(K, linear, upper=0.4)
    np.testing.assert_allclose(solution.alphas, oracle, atol=1e-4)
    assert solution.alphas.sum() == pytest.approx(1.0)
    assert solution.objective == pytest.approx(dual_objective(K, linear, oracle), abs=1e-6)


def test_svdd_duals_match_oracle(five_points):
    kernel = rbf_kernel(1.0)
    model = fit_svdd(five_points, kernel=kernel, nu=0.5)
    K = kernel(five_points.rows)
    oracle = _projected_gradient_oracle(K, -0.5 * np.diag(K), upper=1.0 / (0.5 * 5))
    np.testing.assert_allclose(model.alphas, oracle, atol=1e-4)


def test_ocsvm_duals_match_oracle(five_points):
    kernel = rbf_kernel(1.0)
    model = fit_ocsvm(five_points, kernel=kernel, nu=0.5)
    K = kernel(five_points.rows)
    oracle = _projected_gradient_oracle(K, np.zeros(5), upper=1.0 / (0.5 * 5))
    np.testing.assert_allclose(model.alphas, oracle, atol=1e-4)


def test_nu_one_gives_uniform_weights(five_points):
    kernel = rbf_kernel(1.0)
    svdd = fit_svdd(five_points, kernel=kernel, nu=1.0)
    np.testing.assert_allclose(svdd.alphas, 0.2)
    ocsvm = fit_ocsvm(five_points, kernel=kernel, nu=1.0)
    np.testing.assert_allclose(ocsvm.alphas, 0.2)

    # center = kernel mean, so the distance is the squared MMD to the sample
    K = kernel(five_points.rows)
    x = np.array([[0.3, -0.4]])
    k_x = kernel(x, five_points.rows)[0]
    expected = 1.0 - 2.0 * k_x.mean() + K.mean()
    assert svdd.distance2(x)[0] == pytest.approx(expected)


@pytest.mark.parametrize("nu", [0.05, 0.1, 0.3])
def test_svdd_outlier_fraction_bounded_by_nu(moons, nu):
    kernel = rbf_kernel(median_heuristic_gamma(moons.rows))
    model = fit_svdd(moons, kernel=kernel, nu=nu)
    outside = np.mean(model.score_batch(moons) > SCORE_SLACK)
    assert outside <= nu + 2.0 / moons.n


@pytest.mark.parametrize("nu", [0.05, 0.2])
def test_ocsvm_outlier_fraction_bounded_by_nu(moons, nu):
    kernel = rbf_kernel(median_heuristic_gamma(moons.rows))
    model = fit_ocsvm(moons, kernel=kernel, nu=nu)
    outside = np.mean(model.score_batch(moons) > SCORE_SLACK)
    assert outside <= nu + 2.0 / moons.n


def test_ocsvm_and_svdd_rank_alike(moons, moons_test):
    kernel = rbf_kernel(2.0)
    svdd = fit_svdd(moons, kernel=kernel, nu=0.1)
    ocsvm = fit_ocsvm(moons, kernel=kernel, nu=0.1)
    probes = moons_test.rows[:200]
    correlation = spearmanr(svdd.score_batch(probes), ocsvm.score_batch(probes)).correlation
    assert correlation == pytest.approx(1.0, abs=1e-9)


def test_mve_score_at_center_is_minus_radius(blob):
    model = fit_mve(blob, seed=2)
    assert model.score(model.center) == -model.radius2


@pytest.mark.parametrize("nu", [0.05, 0.1, 0.2])
def test_svdd_nu_bounds_on_random_data(nu):
    n = 100
    for seed in range(20):
        rows = np.random.default_rng(seed).normal(size=(n, 2))
        model = fit_svdd(Dataset(rows), kernel=rbf_kernel(median_heuristic_gamma(rows)), nu=nu)
        assert np.mean(model.score_batch(rows) > SCORE_SLACK) <= nu + 2.0 / n
        assert np.mean(model.alphas > BOUND_TOLERANCE) >= nu - 2.0 / n


def test_ocsvm_and_svdd_rank_alike_on_random_data():
    for seed in range(10):
        rng = np.random.default_rng(100 + seed)
        train = Dataset(rng.normal(size=(60, 2)))
        queries = rng.uniform(-3.0, 3.0, size=(80, 2))
        kernel = rbf_kernel(1.0)
        svdd = fit_svdd(train, kernel=kernel, nu=0.1)
        ocsvm = fit_ocsvm(train, kernel=kernel, nu=0.1)
        correlation = spearmanr(svdd.score_batch(queries), ocsvm.score_batch(queries)).correlation
        assert correlation == pytest.approx(1.0, abs=1e-9)


def test_linear_svdd_is_a_sphere_in_input_space():
    rows = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    model = fit_svdd(Dataset(rows), nu=1.0)
    assert model.score([0.0, 0.0]) == pytest.approx(-1.0)
    assert model.score([2.0, 0.0]) == pytest.approx(3.0)


def test_svdd_rejects_bad_nu(five_points):
    with pytest.raises(InvalidNu):
        fit_svdd(five_points, nu=0.0)
    with pytest.raises(InvalidNu):
        fit_ocsvm(five_points, kernel=rbf_kernel(1.0), nu=1.5)


def test_semi_supervised_svdd_separates_labeled_anomalies(separable):
    train = Dataset(separable.rows[:50])
    labeled = separable.subset(np.arange(50, 72))
    model = fit_semi_supervised_svdd(train, labeled, kernel=rbf_kernel(0.5), nu=0.1)
    assert model.semi_supervised
    assert min(model.objective_history) <= model.objective_history[0]
    scores = model.score_batch(labeled)
    assert auroc(LabeledScores.from_dataset(scores, labeled)) == 1.0


def test_selection_single_grid_point(separable):
    result = select_nu_and_gamma(Dataset(separable.rows[:60]), separable, nus=[0.1], gammas=[0.5], threads=1)
    assert (result.nu, result.gamma) == (0.1, 0.5)
    assert len(result.table) == 1


def test_selection_on_separable_validation(separable):
    train = Dataset(separable.rows[:40])
    val = separable.subset(np.arange(40, 72))
    gammas = [0.1, 0.5, 1.0]
    result = select_nu_and_gamma(train, val, nus=DEFAULT_NU_GRID, gammas=gammas, method=SelectionMethod.SVDD, threads=2)
    assert result.val_auc == 1.0
    # every grid point separates perfectly, so ties go to the largest gamma, then the first nu
    assert result.gamma == 1.0 and result.nu == DEFAULT_NU_GRID[0]
    assert result.gamma_at_grid_edge
    assert len(result.table) == len(DEFAULT_NU_GRID) * len(gammas)


def test_default_nu_grid():
    assert DEFAULT_NU_GRID == (0.01, 0.05, 0.1, 0.2)


def test_selection_needs_both_classes(separable):
    normal_only = separable.subset(np.flatnonzero(separable.mask(Label.NORMAL)))
    with pytest.raises(NoLabeledValidation):
        select_nu_and_gamma(Dataset(separable.rows[:40]), normal_only, nus=[0.1], gammas=[1.0])
