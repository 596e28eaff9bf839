"""Seed-averaged AUROC of every toy-benchmark method on the two-moons problem."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Union

import numpy as np
import pandas as pd

from src.anoscope.core.types import Dataset, Label
from src.anoscope.data.toy import TOY_BOUNDS, TwoMoonsConfig, gen_two_moons, sample_uniform_anomalies
from src.anoscope.evaluation.metrics import LabeledScores, auroc
from src.anoscope.models.kpca import neighbor_similarity_gamma
from src.anoscope.models.selection import SelectionMethod, select_nu_and_gamma
from src.anoscope.pipelines.base import BasePipeline, PipelineOutput
from src.anoscope.registry import build_detector_by_name
from src.utils.logging import get_logger

logger = get_logger(__name__)

DEFAULT_SEEDS = (0, 1, 2, 3, 4)
N_TEST_NORMAL = 500
N_TEST_ANOMALY = 100
N_HOLDOUT_NORMAL = 100
N_HOLDOUT_ANOMALY = 20
TUNED_METHODS = ("svdd", "ocsvm", "kpca")

_NETWORK = {"hidden": [32, 16], "bottleneck": 4, "epochs": 150, "learning_rate": 1e-3, "batch_size": 100}

# method name -> regularization overrides used on the 2-D toy data.
# semi-supervised-svdd and deep-sad are left out: the benchmark has no labeled training rows.
DEFAULT_TOY_METHODS: Dict[str, Dict[str, Any]] = {
    "gaussian": {},
    "gmm": {"k": 4},
    "kde": {},
    "ppca": {"d": 1},
    "mve": {},
    "min-volume-sphere": {"nu": 0.05},
    "svdd": {"nu": 0.05, "gamma": 2.0},
    "ocsvm": {"nu": 0.05, "gamma": 2.0},
    "deep-svdd": {**_NETWORK, "center_eps": 0.1},
    "soft-boundary-deep-svdd": {**_NETWORK, "nu": 0.05, "center_eps": 0.1},
    "pca": {"n_components": 1},
    "kpca": {"gamma": 2.0, "variance_fraction": 0.9},
    "kmeans": {"k": 8},
    "kmedians": {"k": 8},
    "autoencoder": {
        "hidden": [32, 32],
        "bottleneck": 1,
        "epochs": 300,
        "learning_rate": 5e-3,
        "batch_size": 100,
    },
}


def _labeled_moons(cfg: TwoMoonsConfig, n_normal: int, n_anomaly: int, normal_seed: int, anomaly_seed: int):
    normals = gen_two_moons(cfg, n=n_normal, seed=normal_seed)
    normals = Dataset(normals.rows, np.full(normals.n, int(Label.NORMAL)), normals.feature_names)
    anomalies = sample_uniform_anomalies(TOY_BOUNDS, n_anomaly, seed=anomaly_seed)
    return Dataset.concat([normals, Dataset(anomalies.rows, anomalies.labels, normals.feature_names)])


def toy_split(cfg: TwoMoonsConfig, rng: np.random.Generator):
    """cfg.n_train training moons plus a labeled test set of fresh moons and uniform anomalies."""
    train_seed, normal_seed, anomaly_seed = (int(s) for s in rng.integers(0, 2**31 - 1, size=3))
    train = gen_two_moons(cfg, seed=train_seed)
    return train, _labeled_moons(cfg, N_TEST_NORMAL, N_TEST_ANOMALY, normal_seed, anomaly_seed)


def toy_holdout(cfg: TwoMoonsConfig, rng: np.random.Generator) -> Dataset:
    """Small labeled hold-out for kernel-scale selection, drawn after the train/test split."""
    normal_seed, anomaly_seed = (int(s) for s in rng.integers(0, 2**31 - 1, size=2))
    return _labeled_moons(cfg, N_HOLDOUT_NORMAL, N_HOLDOUT_ANOMALY, normal_seed, anomaly_seed)


def tune_kernel_settings(
    methods: Dict[str, Dict[str, Any]],
    train: Dataset,
    holdout: Dataset,
    threads: Optional[int] = None,
) -> Dict[str, Dict[str, Any]]:
    """
    SVDD and OC-SVM take (nu, gamma) from a validation-AUROC search on the
    labeled hold-out; kPCA takes the neighbour-similarity width of the
    training rows. Other methods keep their settings.
    """
    tuned = {}
    for name, settings in methods.items():
        settings = dict(settings)
        if name in (SelectionMethod.SVDD.value, SelectionMethod.OCSVM.value):
            result = select_nu_and_gamma(train, holdout, method=SelectionMethod(name), threads=threads)
            settings.update(nu=result.nu, gamma=result.gamma)
        elif name == "kpca":
            settings["gamma"] = neighbor_similarity_gamma(train)
        tuned[name] = settings
    return tuned


class BenchToyPipeline(BasePipeline):
    name = "bench-toy"

    def invoke(self, seeds: Sequence[int] = DEFAULT_SEEDS, **kwargs) -> PipelineOutput:
        cfg = self.config.get("toy") or TwoMoonsConfig()
        methods = self.config.get("methods") or DEFAULT_TOY_METHODS
        threads = self.config.get("threads")
        tune = bool(self.config.get("tune_kernels"))

        per_seed: Dict[str, list] = {name: [] for name in methods}
        tuned: Dict[str, Dict[str, Dict[str, float]]] = {}
        for seed in seeds:
            rng = np.random.default_rng(seed)
            train, test = toy_split(cfg, rng)
            settings_by_name = methods
            if tune:
                settings_by_name = tune_kernel_settings(methods, train, toy_holdout(cfg, rng), threads=threads)
                tuned[str(seed)] = {
                    name: {k: float(v) for k, v in settings.items() if k in ("nu", "gamma")}
                    for name, settings in settings_by_name.items()
                    if name in TUNED_METHODS
                }
            for name, settings in settings_by_name.items():
                model = build_detector_by_name(name, **settings).fit(train)
                value = auroc(LabeledScores.from_dataset(model.score_batch(test, threads=threads), test))
                logger.info(f"seed {seed}: {name} AUROC {value:.4f}")
                per_seed[name].append(value)

        table = []
        for name, values in per_seed.items():
            row = {"method": name, "auroc_mean": float(np.mean(values)), "auroc_std": float(np.std(values))}
            row.update({f"auroc_seed_{seed}": float(v) for seed, v in zip(seeds, values)})
            table.append(row)
        metadata = {
            "seeds": [int(s) for s in seeds],
            "n_train": cfg.n_train,
            "n_test_normal": N_TEST_NORMAL,
            "n_test_anomaly": N_TEST_ANOMALY,
            "tune_kernels": tune,
        }
        if tune:
            metadata["tuned"] = tuned
        return PipelineOutput(
            name=self.name,
            table=table,
            metrics={row["method"]: row["auroc_mean"] for row in table},
            metadata=metadata,
        )


def run_bench_toy(
    seeds: Sequence[int] = DEFAULT_SEEDS,
    toy: Optional[TwoMoonsConfig] = None,
    methods: Optional[Dict[str, Dict[str, Any]]] = None,
    threads: Optional[int] = None,
    tune_kernels: bool = False,
) -> PipelineOutput:
    return BenchToyPipeline(
        {"toy": toy, "methods": methods, "threads": threads, "tune_kernels": tune_kernels}
    ).invoke(seeds=seeds)


def write_bench_table(output: PipelineOutput, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(output.table).to_csv(path, index=False, lineterminator="\n", float_format="%.10f")
    return path
