"""Validation-set grid search over (nu, gamma) for the kernel one-class models."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from itertools import product
from typing import List, Optional, Sequence

import numpy as np

from src.anoscope.core.types import Dataset, Label
from src.anoscope.errors import InvalidConfig, NoLabeledValidation
from src.anoscope.evaluation.metrics import LabeledScores, auroc
from src.anoscope.kernels import KernelSpec, gamma_grid, rbf_kernel
from src.anoscope.models.base import BaseDetector
from src.anoscope.models.ocsvm import fit_ocsvm
from src.anoscope.models.svdd import fit_svdd
from src.utils.env import read_thread_cap
from src.utils.logging import get_logger

logger = get_logger(__name__)

DEFAULT_NU_GRID = (0.01, 0.05, 0.1, 0.2)


class SelectionMethod(str, Enum):
    SVDD = "svdd"
    OCSVM = "ocsvm"


@dataclass(frozen=True)
class GridPoint:
    nu: float
    gamma: float
    val_auc: float


@dataclass
class SelectionResult:
    nu: float
    gamma: float
    val_auc: float
    model: BaseDetector
    table: List[GridPoint] = field(default_factory=list)

    @property
    def gamma_at_grid_edge(self) -> bool:
        gammas = [point.gamma for point in self.table]
        return self.gamma in (min(gammas), max(gammas))


def _validation_scores(val: Optional[Dataset]) -> Dataset:
    if val is None or val.count(Label.ANOMALY) == 0 or val.count(Label.NORMAL) == 0:
        raise NoLabeledValidation("validation set needs at least one Normal and one Anomaly row")
    labeled = val.mask(Label.ANOMALY) | val.mask(Label.NORMAL)
    return val if labeled.all() else val.subset(np.flatnonzero(labeled))


def select_nu_and_gamma(
    train: Dataset,
    val: Dataset,
    nus: Sequence[float] = DEFAULT_NU_GRID,
    gammas: Optional[Sequence[float]] = None,
    method: SelectionMethod = SelectionMethod.OCSVM,
    kernel: Optional[KernelSpec] = None,
    threads: Optional[int] = None,
) -> SelectionResult:
    """
    Fit one model per (nu, gamma) and keep the best validation AUROC.

    Ties go to the larger gamma, then to the earlier nu in ``nus``. ``kernel``
    sets the kernel family (RBF by default, or a Mahalanobis kernel whose
    gamma is overridden per grid point).
    """
    val = _validation_scores(val)
    method = SelectionMethod(method)
    gammas = gamma_grid(train.dim) if gammas is None else np.asarray(gammas, dtype=np.float64)
    if len(nus) == 0 or len(gammas) == 0:
        raise InvalidConfig("nu and gamma grids must be non-empty")
    base = kernel if kernel is not None else rbf_kernel(1.0)
    trainer = fit_svdd if method == SelectionMethod.SVDD else fit_ocsvm
    grid = list(product([float(nu) for nu in nus], [float(g) for g in gammas]))

    def run(point):
        nu, gamma = point
        model = trainer(train, kernel=base.with_gamma(gamma), nu=nu)
        score = auroc(LabeledScores.from_dataset(model.score_batch(val, threads=1), val))
        logger.debug(f"{method.value} nu={nu} gamma={gamma:.6g}: validation AUROC {score:.4f}")
        return GridPoint(nu=nu, gamma=gamma, val_auc=score), model

    threads = read_thread_cap() if threads is None else max(1, int(threads))
    if threads == 1:
        results = [run(point) for point in grid]
    else:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            results = list(executor.map(run, grid))

    best_index = 0
    for index, (point, _) in enumerate(results):
        best = results[best_index][0]
        if point.val_auc > best.val_auc or (point.val_auc == best.val_auc and point.gamma > best.gamma):
            best_index = index
    best, model = results[best_index]
    logger.info(
        f"selected {method.value} nu={best.nu} gamma={best.gamma:.6g} "
        f"(validation AUROC {best.val_auc:.4f}, {len(grid)} grid points)"
    )
    return SelectionResult(
        nu=best.nu, gamma=best.gamma, val_auc=best.val_auc, model=model, table=[p for p, _ in results]
    )
