"""
Supported (loss, model family, feature map) combinations and the trainer each
one dispatches to.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

from src.anoscope.core.dimensions import FeatureMap, FeatureMapKind, LossKind, ModelFamily, ModelingDimensions
from src.anoscope.core.types import Dataset, Label
from src.anoscope.data.splits import holdout_split
from src.anoscope.deep.autoencoder import fit_autoencoder
from src.anoscope.deep.deep_svdd import DeepSVDDVariant, fit_deep_svdd
from src.anoscope.deep.mlp import Activation, MLPSpec
from src.anoscope.deep.optim import OptimizerSpec
from src.anoscope.errors import InvalidConfig, UnlabeledInput, UnsupportedCombination
from src.anoscope.kernels import KernelSpec, median_heuristic_gamma, rbf_kernel
from src.anoscope.models.base import BaseDetector
from src.anoscope.models.gaussian import fit_gaussian
from src.anoscope.models.gmm import fit_gmm
from src.anoscope.models.kde import fit_kde, select_bandwidth
from src.anoscope.models.kpca import fit_kpca
from src.anoscope.models.mve import fit_mve
from src.anoscope.models.ocsvm import fit_ocsvm
from src.anoscope.models.pca import fit_pca
from src.anoscope.models.ppca import fit_ppca
from src.anoscope.models.svdd import fit_semi_supervised_svdd, fit_svdd
from src.anoscope.models.vq import fit_vq
from src.utils.logging import get_logger

logger = get_logger(__name__)

Trainer = Callable[[Dataset, Dict[str, Any], FeatureMap, Optional[Dataset]], BaseDetector]

OPTIMIZER_PARAMETERS = {
    "optimizer": "adam",
    "learning_rate": 1e-3,
    "epochs": 100,
    "batch_size": 128,
    "weight_decay": 1e-6,
}


def _plain(value: Any) -> Any:
    return getattr(value, "value", value)


@dataclass
class MethodDefinition:
    """One supported row of the methods table."""

    name: str
    description: str
    category: str
    dimensions: ModelingDimensions
    trainer: Trainer

    # regularization keys the trainer understands, with their defaults
    parameters: Dict[str, Any] = field(default_factory=dict)
    # regularization values that tell rows sharing a key apart
    selector: Dict[str, Any] = field(default_factory=dict)
    needs_labels: bool = False

    def key(self):
        return self.dimensions.key()

    def matches(self, dims: ModelingDimensions) -> bool:
        if dims.key() != self.key():
            return False
        return all(_plain(dims.regularization.get(k, v)) == _plain(v) for k, v in self.selector.items())

    def resolve(self, regularization: Dict[str, Any]) -> Dict[str, Any]:
        unknown = sorted(set(regularization) - set(self.parameters))
        if unknown:
            raise InvalidConfig(
                f"method '{self.name}' does not take {unknown}; allowed: {sorted(self.parameters)}"
            )
        resolved = dict(self.parameters)
        resolved.update({k: v for k, v in regularization.items() if v is not None})
        return resolved


def _kernel(feature_map: FeatureMap, params: Dict[str, Any], train: Dataset) -> KernelSpec:
    kernel = feature_map.kernel
    gamma = params.get("gamma")
    if kernel is None:
        return rbf_kernel(float(gamma) if gamma is not None else median_heuristic_gamma(train.rows))
    return kernel.with_gamma(float(gamma)) if gamma is not None else kernel


def _optimizer(params: Dict[str, Any]) -> OptimizerSpec:
    return OptimizerSpec(
        kind=params["optimizer"],
        learning_rate=float(params["learning_rate"]),
        epochs=int(params["epochs"]),
        batch_size=int(params["batch_size"]),
        weight_decay=float(params["weight_decay"]),
    )


def _network(feature_map: FeatureMap, params: Dict[str, Any], train: Dataset, use_bias: bool) -> MLPSpec:
    if feature_map.mlp is not None:
        return feature_map.mlp
    hidden = [int(h) for h in params["hidden"]]
    bottleneck = int(params["bottleneck"]) if params.get("bottleneck") is not None else max(1, train.dim // 2)
    return MLPSpec(
        layer_dims=[train.dim, *hidden, bottleneck],
        activation=Activation(params["activation"]),
        use_bias=use_bias,
        seed=int(params["seed"]),
    )


def _labeled_rows(labeled: Optional[Dataset], method: str) -> Dataset:
    if labeled is None or labeled.count(Label.ANOMALY) + labeled.count(Label.NORMAL) == 0:
        raise UnlabeledInput(f"method '{method}' needs labeled rows")
    return labeled


def _train_gaussian(train, params, feature_map, labeled):
    return fit_gaussian(train)


def _train_gmm(train, params, feature_map, labeled):
    return fit_gmm(
        train,
        k=int(params["k"]),
        seed=int(params["seed"]),
        max_iter=int(params["max_iter"]),
        tol=float(params["tol"]),
        scoring=params["scoring"],
    )


def _train_kde(train, params, feature_map, labeled):
    if params.get("gamma") is not None or feature_map.kernel is not None:
        return fit_kde(train, kernel=_kernel(feature_map, params, train))
    fit_part, holdout = holdout_split(train, fraction=float(params["holdout_fraction"]), seed=int(params["seed"]))
    gamma = select_bandwidth(fit_part, holdout, kernel=feature_map.kernel)
    return fit_kde(train, gamma=gamma)


def _train_ppca(train, params, feature_map, labeled):
    return fit_ppca(train, d=int(params["d"]))


def _train_mve(train, params, feature_map, labeled):
    return fit_mve(
        train,
        support_fraction=float(params["support_fraction"]),
        contamination=float(params["contamination"]),
        seed=int(params["seed"]),
    )


def _train_sphere(train, params, feature_map, labeled):
    return fit_svdd(train, kernel=None, nu=float(params["nu"]))


def _train_svdd(train, params, feature_map, labeled):
    return fit_svdd(train, kernel=_kernel(feature_map, params, train), nu=float(params["nu"]))


def _train_semi_supervised_svdd(train, params, feature_map, labeled):
    return fit_semi_supervised_svdd(
        train,
        _labeled_rows(labeled, "semi-supervised-svdd"),
        kernel=_kernel(feature_map, params, train),
        nu=float(params["nu"]),
        kappa=float(params["kappa"]),
    )


def _train_ocsvm(train, params, feature_map, labeled):
    return fit_ocsvm(train, kernel=_kernel(feature_map, params, train), nu=float(params["nu"]))


def _train_pca(train, params, feature_map, labeled):
    return fit_pca(
        train,
        variance_fraction=float(params["variance_fraction"]),
        solver=params["solver"],
        n_components=params.get("n_components"),
    )


def _train_kpca(train, params, feature_map, labeled):
    explicit = feature_map.kernel is not None or params.get("gamma") is not None
    kernel = _kernel(feature_map, params, train) if explicit else None
    return fit_kpca(
        train,
        kernel=kernel,
        variance_fraction=float(params["variance_fraction"]),
        n_components=params.get("n_components"),
    )


def _train_vq(train, params, feature_map, labeled):
    return fit_vq(train, k=int(params["k"]), norm=params["norm"], seed=int(params["seed"]))


def _train_autoencoder(train, params, feature_map, labeled):
    return fit_autoencoder(
        train,
        _network(feature_map, params, train, use_bias=True),
        _optimizer(params),
        holdout_fraction=float(params["holdout_fraction"]),
        seed=int(params["seed"]),
    )


def _deep_svdd_trainer(variant: DeepSVDDVariant) -> Trainer:
    def train_deep_svdd(train, params, feature_map, labeled):
        if variant == DeepSVDDVariant.SAD:
            labeled = _labeled_rows(labeled, "deep-sad")
        return fit_deep_svdd(
            train,
            _network(feature_map, params, train, use_bias=False),
            _optimizer(params),
            variant=variant,
            labeled=labeled,
            nu=float(params["nu"]),
            eta=float(params["eta"]),
            center_eps=float(params["center_eps"]),
            seed=int(params["seed"]),
        )

    return train_deep_svdd


class MethodRegistry:
    """Central registry of all supported detectors"""

    def __init__(self):
        self._methods: Dict[str, MethodDefinition] = {}
        self._register_default_methods()

    def _register_default_methods(self):
        raw, kernel, neural = FeatureMap.raw(), FeatureMap(FeatureMapKind.KERNEL), FeatureMap.neural()
        nll, hinge, shifted = LossKind.NEG_LOG_LIKELIHOOD, LossKind.HINGE, LossKind.SHIFTED_HINGE
        squared = LossKind.SQUARED_ERROR
        deep = {
            **OPTIMIZER_PARAMETERS,
            "hidden": [32, 16],
            "bottleneck": None,
            "activation": "elu",
            "seed": 0,
            "nu": 0.1,
            "eta": 1.0,
            "center_eps": 0.0,
        }

        # Probabilistic
        self.register(MethodDefinition(
            name="gaussian",
            description="Gaussian / Mahalanobis distance to the sample mean",
            category="probabilistic",
            dimensions=ModelingDimensions(nll, ModelFamily.GAUSSIAN, raw),
            trainer=_train_gaussian,
        ))
        self.register(MethodDefinition(
            name="gmm",
            description="Gaussian mixture fitted by EM, scored by negative log-likelihood",
            category="probabilistic",
            dimensions=ModelingDimensions(nll, ModelFamily.GMM, raw),
            trainer=_train_gmm,
            parameters={"k": 2, "seed": 0, "max_iter": 200, "tol": 1e-8, "scoring": "nll"},
        ))
        self.register(MethodDefinition(
            name="kde",
            description="Kernel density estimate; gamma picked on a training hold-out when not given",
            category="probabilistic",
            dimensions=ModelingDimensions(nll, ModelFamily.KERNEL_DENSITY, kernel),
            trainer=_train_kde,
            parameters={"gamma": None, "holdout_fraction": 0.1, "seed": 0},
        ))
        self.register(MethodDefinition(
            name="ppca",
            description="Probabilistic PCA, closed-form maximum likelihood",
            category="probabilistic",
            dimensions=ModelingDimensions(nll, ModelFamily.PPCA, raw),
            trainer=_train_ppca,
            parameters={"d": 1},
        ))

        # One-class
        self.register(MethodDefinition(
            name="mve",
            description="Minimum-volume ellipsoid from a FastMCD-style estimator",
            category="one-class",
            dimensions=ModelingDimensions(shifted, ModelFamily.ELLIPSOID, raw),
            trainer=_train_mve,
            parameters={"support_fraction": 0.9, "contamination": 0.01, "seed": 0},
        ))
        self.register(MethodDefinition(
            name="min-volume-sphere",
            description="Minimum-volume sphere in input space",
            category="one-class",
            dimensions=ModelingDimensions(shifted, ModelFamily.HYPERSPHERE, raw),
            trainer=_train_sphere,
            parameters={"nu": 0.1},
        ))
        self.register(MethodDefinition(
            name="svdd",
            description="Kernel support vector data description",
            category="one-class",
            dimensions=ModelingDimensions(shifted, ModelFamily.HYPERSPHERE, kernel),
            trainer=_train_svdd,
            parameters={"nu": 0.1, "gamma": None},
        ))
        self.register(MethodDefinition(
            name="semi-supervised-svdd",
            description="SVDD with labeled normal and anomalous rows",
            category="one-class",
            dimensions=ModelingDimensions(hinge, ModelFamily.HYPERSPHERE, kernel),
            trainer=_train_semi_supervised_svdd,
            parameters={"nu": 0.1, "gamma": None, "kappa": 1.0},
            needs_labels=True,
        ))
        self.register(MethodDefinition(
            name="ocsvm",
            description="One-class SVM separating the data from the origin",
            category="one-class",
            dimensions=ModelingDimensions(shifted, ModelFamily.HYPERPLANE, kernel),
            trainer=_train_ocsvm,
            parameters={"nu": 0.1, "gamma": None},
        ))
        self.register(MethodDefinition(
            name="deep-svdd",
            description="One-class Deep SVDD: mean squared distance to a fixed center",
            category="one-class",
            dimensions=ModelingDimensions(LossKind.LINEAR_ONE_CLASS, ModelFamily.HYPERSPHERE, neural),
            trainer=_deep_svdd_trainer(DeepSVDDVariant.ONE_CLASS),
            parameters=dict(deep),
        ))
        self.register(MethodDefinition(
            name="soft-boundary-deep-svdd",
            description="Soft-boundary Deep SVDD with a learned radius",
            category="one-class",
            dimensions=ModelingDimensions(hinge, ModelFamily.HYPERSPHERE, neural),
            trainer=_deep_svdd_trainer(DeepSVDDVariant.SOFT_BOUNDARY),
            parameters=dict(deep),
        ))
        self.register(MethodDefinition(
            name="deep-sad",
            description="Deep SAD: Deep SVDD with labeled rows pushed in or out",
            category="one-class",
            dimensions=ModelingDimensions(LossKind.SEMI_SUP_EXPONENT, ModelFamily.HYPERSPHERE, neural),
            trainer=_deep_svdd_trainer(DeepSVDDVariant.SAD),
            parameters=dict(deep),
            needs_labels=True,
        ))

        # Reconstruction
        self.register(MethodDefinition(
            name="pca",
            description="PCA reconstruction error",
            category="reconstruction",
            dimensions=ModelingDimensions(squared, ModelFamily.SUBSPACE, raw),
            trainer=_train_pca,
            parameters={"variance_fraction": 0.9, "solver": "eigh", "n_components": None},
        ))
        self.register(MethodDefinition(
            name="kpca",
            description="Kernel PCA feature-space reconstruction error",
            category="reconstruction",
            dimensions=ModelingDimensions(squared, ModelFamily.SUBSPACE, kernel),
            trainer=_train_kpca,
            parameters={"variance_fraction": 0.9, "gamma": None, "n_components": None},
        ))
        self.register(MethodDefinition(
            name="kmeans",
            description="Squared distance to the nearest k-means prototype",
            category="reconstruction",
            dimensions=ModelingDimensions(squared, ModelFamily.PROTOTYPES, raw, {"norm": "l2"}),
            trainer=_train_vq,
            parameters={"k": 2, "norm": "l2", "seed": 0},
            selector={"norm": "l2"},
        ))
        self.register(MethodDefinition(
            name="kmedians",
            description="L1 distance to the nearest k-medians prototype",
            category="reconstruction",
            dimensions=ModelingDimensions(squared, ModelFamily.PROTOTYPES, raw, {"norm": "l1"}),
            trainer=_train_vq,
            parameters={"k": 2, "norm": "l1", "seed": 0},
            selector={"norm": "l1"},
        ))
        self.register(MethodDefinition(
            name="autoencoder",
            description="Autoencoder reconstruction error with hold-out early stopping",
            category="reconstruction",
            dimensions=ModelingDimensions(squared, ModelFamily.AUTOENCODER, neural),
            trainer=_train_autoencoder,
            parameters={
                k: v for k, v in {**deep, "holdout_fraction": 0.1}.items() if k not in ("nu", "eta", "center_eps")
            },
        ))

    def register(self, method_def: MethodDefinition):
        """Register a new method definition"""
        self._methods[method_def.name] = method_def

    def get_method(self, name: str) -> MethodDefinition:
        """Get method definition by name"""
        if name not in self._methods:
            raise InvalidConfig(f"Unknown method: {name}; known: {sorted(self._methods)}")
        return self._methods[name]

    def get_all_methods(self) -> Dict[str, MethodDefinition]:
        return self._methods.copy()

    def get_methods_by_category(self, category: str) -> Dict[str, MethodDefinition]:
        return {name: m for name, m in self._methods.items() if m.category == category}

    def find(self, dims: ModelingDimensions) -> MethodDefinition:
        """
        The registered row matching ``dims``. When none does, the error names
        the first dimension that rules every row out: model family, then
        feature map, then loss.
        """
        for method in self._methods.values():
            if method.matches(dims):
                return method

        rows: List[MethodDefinition] = list(self._methods.values())
        family_rows = [m for m in rows if m.dimensions.model_family == dims.model_family]
        if not family_rows:
            raise UnsupportedCombination("model_family", f"no method fits a {dims.model_family.value} model")
        map_rows = [m for m in family_rows if m.dimensions.feature_map.kind == dims.feature_map.kind]
        if not map_rows:
            raise UnsupportedCombination(
                "feature_map",
                f"{dims.model_family.value} models do not support a {dims.feature_map.kind.value} feature map",
            )
        loss_rows = [m for m in map_rows if m.dimensions.loss == dims.loss]
        if not loss_rows:
            raise UnsupportedCombination(
                "loss",
                f"{dims.loss.value} is not a loss of any {dims.model_family.value}/{dims.feature_map.kind.value} method",
            )
        raise UnsupportedCombination(
            "regularization",
            f"no {dims.model_family.value} method accepts {dims.regularization}",
        )


@dataclass
class DetectorBuilder:
    """Fits the registered trainer for a fixed set of modeling dimensions."""

    method: MethodDefinition
    dimensions: ModelingDimensions

    def fit(self, train: Dataset, labeled: Optional[Dataset] = None) -> BaseDetector:
        params = self.method.resolve(self.dimensions.regularization)
        logger.info(f"fitting '{self.method.name}' on {train.n} rows with {params}")
        return self.method.trainer(train, params, self.dimensions.feature_map, labeled)


# Global registry instance
method_registry = MethodRegistry()


def build_detector(dims: ModelingDimensions, registry: Optional[MethodRegistry] = None) -> DetectorBuilder:
    registry = method_registry if registry is None else registry
    return DetectorBuilder(method=registry.find(dims), dimensions=dims)


def build_detector_by_name(name: str, registry: Optional[MethodRegistry] = None, **regularization: Any) -> DetectorBuilder:
    registry = method_registry if registry is None else registry
    method = registry.get_method(name)
    dims = method.dimensions.with_regularization(**regularization)
    return DetectorBuilder(method=method, dimensions=dims)
