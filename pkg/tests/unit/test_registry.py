import numpy as np
import pytest

from src.anoscope.core.dimensions import FeatureMap, LossKind, ModelFamily, ModelingDimensions
from src.anoscope.core.types import Dataset
from src.anoscope.errors import InvalidConfig, UnlabeledInput, UnsupportedCombination
from src.anoscope.kernels import rbf_kernel
from src.anoscope.models.gaussian import GaussianModel
from src.anoscope.models.svdd import SVDDModel
from src.anoscope.models.vq import VQNorm
from src.anoscope.registry import build_detector, build_detector_by_name, method_registry

ALL_METHODS = [
    "gaussian",
    "gmm",
    "kde",
    "ppca",
    "mve",
    "min-volume-sphere",
    "svdd",
    "semi-supervised-svdd",
    "ocsvm",
    "deep-svdd",
    "soft-boundary-deep-svdd",
    "deep-sad",
    "pca",
    "kpca",
    "kmeans",
    "kmedians",
    "autoencoder",
]


def test_registry_lists_every_method():
    assert sorted(method_registry.get_all_methods()) == sorted(ALL_METHODS)
    categories = {m.category for m in method_registry.get_all_methods().values()}
    assert categories == {"probabilistic", "one-class", "reconstruction"}


def test_gaussian_dispatch(blob):
    dims = ModelingDimensions(LossKind.NEG_LOG_LIKELIHOOD, ModelFamily.GAUSSIAN, FeatureMap.raw())
    builder = build_detector(dims)
    assert builder.method.name == "gaussian"
    assert isinstance(builder.fit(blob), GaussianModel)


def test_svdd_dispatch(moons):
    dims = ModelingDimensions(
        LossKind.SHIFTED_HINGE,
        ModelFamily.HYPERSPHERE,
        FeatureMap.from_kernel(rbf_kernel(2.0)),
        {"nu": 0.1},
    )
    builder = build_detector(dims)
    assert builder.method.name == "svdd"
    model = builder.fit(moons)
    assert isinstance(model, SVDDModel)
    assert model.kernel.gamma == 2.0
    assert model.nu == 0.1


def test_unsupported_combination_names_the_loss():
    dims = ModelingDimensions(LossKind.NEG_LOG_LIKELIHOOD, ModelFamily.HYPERSPHERE, FeatureMap.raw())
    with pytest.raises(UnsupportedCombination) as excinfo:
        build_detector(dims)
    assert excinfo.value.dimension == "loss"


def test_unsupported_combination_names_the_feature_map():
    dims = ModelingDimensions(LossKind.NEG_LOG_LIKELIHOOD, ModelFamily.GAUSSIAN, FeatureMap.neural())
    with pytest.raises(UnsupportedCombination) as excinfo:
        build_detector(dims)
    assert excinfo.value.dimension == "feature_map"


def test_unsupported_combination_names_the_regularization():
    dims = ModelingDimensions(LossKind.SQUARED_ERROR, ModelFamily.PROTOTYPES, FeatureMap.raw(), {"norm": "linf"})
    with pytest.raises(UnsupportedCombination) as excinfo:
        build_detector(dims)
    assert excinfo.value.dimension == "regularization"


@pytest.mark.parametrize("norm, name", [("l2", "kmeans"), ("l1", "kmedians")])
def test_prototype_rows_are_told_apart_by_norm(blob, norm, name):
    dims = ModelingDimensions(
        LossKind.SQUARED_ERROR, ModelFamily.PROTOTYPES, FeatureMap.raw(), {"norm": norm, "k": 3}
    )
    builder = build_detector(dims)
    assert builder.method.name == name
    model = builder.fit(blob)
    assert model.norm == VQNorm(norm)
    assert model.prototypes.shape == (3, 3)


def test_build_by_name_resolves_defaults(blob):
    builder = build_detector_by_name("gmm", k=3)
    assert builder.method.resolve(builder.dimensions.regularization)["k"] == 3
    assert builder.method.resolve({})["k"] == 2
    assert builder.fit(blob).means.shape == (3, 3)


def test_unknown_parameters_and_methods():
    with pytest.raises(InvalidConfig):
        build_detector_by_name("pca", nu=0.1).fit(Dataset(np.ones((5, 2))))
    with pytest.raises(InvalidConfig):
        method_registry.get_method("isolation-forest")


@pytest.mark.parametrize("name, regularization", [("semi-supervised-svdd", {}), ("deep-sad", {"epochs": 1})])
def test_label_hungry_methods_need_labels(moons, name, regularization):
    assert method_registry.get_method(name).needs_labels
    with pytest.raises(UnlabeledInput):
        build_detector_by_name(name, **regularization).fit(moons)


def test_deep_defaults_build_a_bias_free_network(moons):
    model = build_detector_by_name("deep-svdd", epochs=2).fit(moons)
    assert model.network.layer_dims == [2, 32, 16, 1]
    assert not model.network.has_bias
    assert len(model.loss_history) == 2
