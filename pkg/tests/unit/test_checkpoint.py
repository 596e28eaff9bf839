import numpy as np
import pytest
import yaml

from src.anoscope.checkpoint import FORMAT_NAME, HEADER_KEY, MODEL_CLASSES, load_model, read_header, save_model
from src.anoscope.core.types import Dataset
from src.anoscope.errors import InvalidConfig, MissingFile
from src.anoscope.kernels import mahalanobis_kernel
from src.anoscope.models.kde import fit_kde
from src.anoscope.registry import build_detector_by_name

SMALL = {
    "gaussian": {},
    "gmm": {"k": 2},
    "kde": {"gamma": 1.0},
    "ppca": {"d": 1},
    "mve": {},
    "min-volume-sphere": {},
    "svdd": {"gamma": 1.0},
    "semi-supervised-svdd": {"gamma": 1.0},
    "ocsvm": {"gamma": 1.0},
    "deep-svdd": {"epochs": 2, "hidden": [8]},
    "soft-boundary-deep-svdd": {"epochs": 2, "hidden": [8]},
    "deep-sad": {"epochs": 2, "hidden": [8]},
    "pca": {"n_components": 1},
    "kpca": {"n_components": 3},
    "kmeans": {"k": 3},
    "kmedians": {"k": 3},
    "autoencoder": {"epochs": 2, "hidden": [8]},
}


@pytest.mark.parametrize("name", sorted(SMALL))
def test_round_trip_is_bit_exact(tmp_path, separable, name):
    train = Dataset(separable.rows[:60])
    model = build_detector_by_name(name, **SMALL[name]).fit(train, labeled=separable)
    path = save_model(model, tmp_path / f"{name}.npz")
    restored = load_model(path)

    assert type(restored) is type(model)
    probes = separable.rows + 0.25
    assert model.score_batch(probes).tobytes() == restored.score_batch(probes).tobytes()


def test_every_model_class_is_covered():
    assert len(MODEL_CLASSES) == 12


def test_header_summary(tmp_path, moons):
    model = build_detector_by_name("autoencoder", epochs=1, hidden=[4]).fit(moons)
    header = read_header(save_model(model, tmp_path / "ae.npz"))
    assert header["format"] == FORMAT_NAME
    assert header["version"] == 1
    summary = header["summary"]
    assert (summary["class"], summary["family"], summary["n_features"]) == ("AEModel", "autoencoder", 2)
    assert summary["encoder"]["layer_dims"] == [2, 4, 1]
    assert summary["decoder"]["layer_dims"] == [1, 4, 2]
    assert summary["encoder"]["activations"] == ["elu", "linear"]
    assert summary["encoder"]["bias"] is True


def test_mahalanobis_kernel_survives(tmp_path, blob):
    model = fit_kde(blob, kernel=mahalanobis_kernel(np.diag([1.0, 2.0, 0.5]), gamma=0.3))
    restored = load_model(save_model(model, tmp_path / "kde.npz"))
    np.testing.assert_array_equal(restored.kernel.metric, model.kernel.metric)
    assert restored.score_batch(blob).tobytes() == model.score_batch(blob).tobytes()


def test_missing_checkpoint(tmp_path):
    with pytest.raises(MissingFile):
        load_model(tmp_path / "nope.npz")


def test_foreign_archives_are_rejected(tmp_path):
    path = tmp_path / "plain.npz"
    np.savez(path, weights=np.ones(3))
    with pytest.raises(InvalidConfig):
        read_header(path)

    header = {"format": FORMAT_NAME, "version": 1, "summary": {}, "model": {"dataclass": "Popen", "fields": {}}}
    forged = tmp_path / "forged.npz"
    np.savez(forged, **{HEADER_KEY: np.array(yaml.safe_dump(header))})
    with pytest.raises(InvalidConfig):
        load_model(forged)


def test_unsupported_version(tmp_path):
    header = {"format": FORMAT_NAME, "version": 99, "summary": {}, "model": {"value": None}}
    path = tmp_path / "future.npz"
    np.savez(path, **{HEADER_KEY: np.array(yaml.safe_dump(header))})
    with pytest.raises(InvalidConfig):
        read_header(path)
