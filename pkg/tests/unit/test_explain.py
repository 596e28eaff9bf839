import numpy as np
import pytest

from src.anoscope.core.types import Dataset
from src.anoscope.data.toy import gen_nuisance_dataset
from src.anoscope.errors import DimensionMismatch, ZeroHeatmap
from src.anoscope.explain import (
    GradientMode,
    GradientTarget,
    Heatmap,
    explanation_accuracy,
    heatmap_batch,
    lrp_heatmap,
    mean_explanation_accuracy,
    neuralize_kde,
    probe_term_gradients,
    training_point_gradients,
    write_heatmap_pgm,
    write_heatmaps_csv,
)
from src.anoscope.kernels import mahalanobis_kernel, rbf_kernel
from src.anoscope.models.kde import fit_kde


@pytest.fixture
def moons_kde(moons):
    return fit_kde(moons, gamma=2.0)


def test_single_point_distance_layer_is_zero():
    model = fit_kde(Dataset(np.array([[1.0, -1.0]])), gamma=3.0)
    net = neuralize_kde(model)
    np.testing.assert_array_equal(net.distance_layer(np.array([[1.0, -1.0]])), [[0.0]])
    assert net(np.array([1.0, -1.0]))[0] == 0.0


def test_neuralized_score_matches_kde(moons_kde, moons_test):
    net = neuralize_kde(moons_kde)
    probes = moons_test.rows[::3][:100]
    np.testing.assert_allclose(net(probes), moons_kde.score_batch(probes), rtol=1e-12, atol=1e-12)


def test_pooling_weights_sum_to_one(moons_kde, moons_test):
    net = neuralize_kde(moons_kde)
    weights = net.pooling_weights(net.distance_layer(moons_test.rows[:10]))
    np.testing.assert_allclose(weights.sum(axis=1), 1.0)


def test_mahalanobis_distance_layer():
    M = np.array([[2.0, 0.5], [0.5, 1.0]])
    points = np.array([[0.0, 0.0], [1.0, 2.0]])
    model = fit_kde(Dataset(points), kernel=mahalanobis_kernel(M, gamma=0.5))
    x = np.array([0.5, -1.0])
    h = neuralize_kde(model).distance_layer(x[None, :])[0]
    expected = [0.5 * (x - p) @ M @ (x - p) + np.log(2.0) for p in points]
    np.testing.assert_allclose(h, expected)


def test_relevance_vanishes_at_lone_training_point():
    model = fit_kde(Dataset(np.array([[0.3, 0.7, -1.0]])), gamma=1.0)
    for wrt in GradientTarget:
        heatmap = lrp_heatmap(model, [0.3, 0.7, -1.0], wrt=wrt)
        np.testing.assert_array_equal(heatmap.relevance, 0.0)


@pytest.mark.parametrize("gradients", [training_point_gradients, probe_term_gradients])
def test_analytic_gradients_match_finite_differences(moons, gradients):
    model = fit_kde(Dataset(moons.rows[:30]), gamma=1.5)
    x = np.array([0.4, 1.7])
    analytic = gradients(model, x, GradientMode.ANALYTIC)
    numeric = gradients(model, x, GradientMode.FINITE_DIFFERENCE)
    np.testing.assert_allclose(analytic, numeric, atol=1e-6)


def test_both_expansions_agree(moons_kde):
    x = np.array([-1.2, 2.5])
    by_points = lrp_heatmap(moons_kde, x, wrt=GradientTarget.TRAINING_POINTS)
    by_probe = lrp_heatmap(moons_kde, x, wrt="probe")
    np.testing.assert_allclose(by_points.relevance, by_probe.relevance, rtol=1e-10)
    assert by_points.score == pytest.approx(moons_kde.score(x))


def test_rbf_heatmaps_are_non_negative(moons_kde, moons_test):
    for heatmap in heatmap_batch(moons_kde, moons_test.rows[150:250]):
        assert np.all(heatmap.relevance >= 0.0)


def test_metric_damps_relevance():
    points = Dataset(np.array([[0.0, 0.0]]))
    x = np.array([1.0, 1.0])
    plain = lrp_heatmap(fit_kde(points, gamma=1.0), x)
    np.testing.assert_allclose(plain.relevance, [1.0, 1.0])

    damped = lrp_heatmap(fit_kde(points, kernel=mahalanobis_kernel(np.diag([1.0, 0.01]))), x)
    np.testing.assert_allclose(damped.relevance, [1.0, 0.01])
    assert damped.relevance[0] / damped.relevance.sum() > plain.relevance[0] / plain.relevance.sum()


def test_heatmap_rejects_wrong_dimension(moons_kde):
    with pytest.raises(DimensionMismatch):
        lrp_heatmap(moons_kde, [1.0, 2.0, 3.0])


@pytest.mark.parametrize(
    "relevance, mask, expected",
    [
        ([2.0, 0.0, 4.0], [1, 0, 2], 1.0),
        ([0.0, 3.0], [1, 0], 0.0),
        ([3.0, 4.0], [1, 0], 0.6),
        ([1.0, 1.0, 0.0, 0.0], [1, 1, 1, 1], 1.0 / np.sqrt(2.0)),
    ],
)
def test_explanation_accuracy(relevance, mask, expected):
    assert explanation_accuracy(relevance, mask) == pytest.approx(expected)


def test_explanation_accuracy_errors():
    with pytest.raises(ZeroHeatmap):
        explanation_accuracy(Heatmap(np.zeros(2), 0.0), [1, 0])
    with pytest.raises(DimensionMismatch):
        explanation_accuracy([1.0, 2.0], [1, 0, 0])


def test_mean_explanation_accuracy_on_nuisance_data():
    train, test, masks = gen_nuisance_dataset(n_train=200, n_test_normal=10, n_test_anomaly=20, seed=1)
    model = fit_kde(train, gamma=0.5)
    accuracy = mean_explanation_accuracy(model, test.rows, masks)
    assert 0.0 < accuracy <= 1.0


def test_write_heatmaps_csv(tmp_path, moons_kde):
    heatmaps = heatmap_batch(moons_kde, np.array([[0.0, 0.5], [2.0, -0.5]]))
    path = write_heatmaps_csv(heatmaps, tmp_path / "heatmaps.csv", probe_ids=[7, 8])
    lines = path.read_text().splitlines()
    assert lines[0] == "probe_id,score,R_1,R_2"
    assert lines[1].startswith("7,") and lines[2].startswith("8,")


def test_write_heatmap_pgm(tmp_path):
    grid = np.array([[0.0, 1.0, 2.0], [3.0, 4.0, 5.0]])
    payload = write_heatmap_pgm(grid, tmp_path / "map.pgm").read_bytes()
    header = b"P5\n3 2\n255\n"
    assert payload.startswith(header)
    pixels = np.frombuffer(payload[len(header) :], dtype=np.uint8)
    assert pixels.tolist() == [0, 51, 102, 153, 204, 255]


@pytest.mark.parametrize("seed", range(5))
def test_metric_on_nuisance_dims_raises_explanation_accuracy(seed):
    train, test, masks = gen_nuisance_dataset(n_train=200, n_test_normal=10, n_test_anomaly=30, seed=seed)
    plain = mean_explanation_accuracy(fit_kde(train, gamma=0.5), test.rows, masks)
    metric = mahalanobis_kernel(np.diag([1.0, 1.0, 0.01, 0.01]), gamma=0.5)
    damped = mean_explanation_accuracy(fit_kde(train, kernel=metric), test.rows, masks)
    assert damped > plain


@pytest.mark.parametrize("c", [0.1, 3.0, 40.0])
def test_relevance_under_joint_rescaling(moons, moons_test, c):
    # x -> c x with gamma -> gamma / c^2 leaves the pooling weights unchanged,
    # so R / gamma is homogeneous of degree 2 in the coordinates
    gamma = 2.0
    base = fit_kde(moons, gamma=gamma)
    scaled = fit_kde(Dataset(c * moons.rows), gamma=gamma / c**2)
    for x in moons_test.rows[190:210]:
        r = lrp_heatmap(base, x).relevance
        r_scaled = lrp_heatmap(scaled, c * x).relevance
        np.testing.assert_allclose(r_scaled / (gamma / c**2), c**2 * r / gamma, rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(r_scaled, r, rtol=1e-9, atol=1e-12)
