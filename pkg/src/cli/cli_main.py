import json
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import click
import numpy as np

from src.anoscope.checkpoint import load_model, save_model
from src.anoscope.core.dimensions import FeatureMap, FeatureMapKind
from src.anoscope.core.thresholds import calibrate_threshold
from src.anoscope.core.types import Dataset, DecisionThreshold, Label
from src.anoscope.data.contamination import ContaminationSpec, contaminate
from src.anoscope.data.io import load_csv, load_scores_csv, write_csv, write_scores_csv
from src.anoscope.data.toy import TOY_BOUNDS, TwoMoonsConfig, gen_nuisance_dataset, gen_two_moons, sample_uniform_anomalies
from src.anoscope.errors import ConfigError
from src.anoscope.evaluation.metrics import LabeledScores
from src.anoscope.evaluation.report import evaluate, write_report
from src.anoscope.explain.accuracy import mean_explanation_accuracy
from src.anoscope.explain.heatmap import GradientMode, GradientTarget, heatmap_batch
from src.anoscope.explain.io import write_heatmap_pgm, write_heatmaps_csv
from src.anoscope.kernels import linear_kernel, mahalanobis_kernel, rbf_kernel
from src.anoscope.models.kde import KDEModel
from src.anoscope.pipelines.bench_toy import DEFAULT_SEEDS, DEFAULT_TOY_METHODS, run_bench_toy, write_bench_table
from src.anoscope.pipelines.thyroid import THYROID_NU, run_thyroid_pipeline
from src.anoscope.registry import DetectorBuilder, MethodDefinition, method_registry
from src.cli.managers.config_manager import KERNEL_KINDS, REPORT_FORMATS, TOY_KINDS, ConfigurationManager, RunConfig
from src.cli.method_registry import method_listing
from src.cli.utils.helpers import (
    output_stem_path,
    parse_float_list_option,
    parse_hyperparameters_option,
    parse_int_list_option,
    parse_list_option,
    report_errors,
)
from src.utils.logging import get_logger, setup_cli_logging

logger = get_logger(__name__)


def common_options(func):
    """--config / --config-name / --verbosity, shared by every command."""
    func = click.option('--verbosity', '-v', type=int, default=None, help="Logging verbosity level (0-4)")(func)
    func = click.option('--config-name', 'config_name', type=str, help="Name of a configuration in $ANOSCOPE_CONFIG_DIR")(func)
    func = click.option('--config', '-c', 'config_path', type=str, help="Path to a .yaml run configuration")(func)
    return func


def _prepare(command: str, config_path: Optional[str], config_name: Optional[str], **overrides) -> Tuple[ConfigurationManager, RunConfig]:
    manager = ConfigurationManager(command, config_path=config_path, config_name=config_name)
    config = manager.build(overrides)
    setup_cli_logging(verbosity=config.verbosity)
    logger.debug(f"{command} configuration: {config.to_dict()}")
    return manager, config


def _write_json(payload: Dict[str, Any], path: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True, default=lambda o: o.item() if hasattr(o, "item") else str(o))
        f.write("\n")
    return path


def _feature_map(method_def: MethodDefinition, config: RunConfig, dim: int) -> Optional[FeatureMap]:
    if config.kernel is None:
        return None
    if method_def.dimensions.feature_map.kind != FeatureMapKind.KERNEL:
        raise ConfigError(f"method '{method_def.name}' does not use a kernel", key="kernel")
    if config.kernel == "linear":
        return FeatureMap.from_kernel(linear_kernel())
    if config.kernel == "mahalanobis":
        if len(config.metric_diag) != dim:
            raise ConfigError(f"metric_diag has {len(config.metric_diag)} entries, data has {dim} features", key="metric_diag")
        gamma = config.gamma if config.gamma is not None else 1.0
        return FeatureMap.from_kernel(mahalanobis_kernel(np.diag(config.metric_diag), gamma))
    # rbf without an explicit gamma falls back to the method's own width heuristic
    return FeatureMap.from_kernel(rbf_kernel(config.gamma)) if config.gamma is not None else None


@click.group()
def cli():
    pass


@click.command()
@click.option('--toy', type=click.Choice(TOY_KINDS), help="Which generator to draw from")
@click.option('--n', 'n', type=int, help="Number of (training) rows")
@click.option('--anomalies', type=int, help="Append this many labeled uniform anomalies (two-moons) or test anomalies (nuisance)")
@click.option('--contamination', type=float, help="Rate at which rows are silently replaced by uniform anomalies")
@click.option('--seed', type=int, help="Seed of the run's random generator")
@click.option('--out', 'output', type=str, help="Output CSV")
@common_options
@report_errors("generate")
def generate(config_path, config_name, verbosity, **options):
    """Write a synthetic dataset as CSV."""
    _, config = _prepare("generate", config_path, config_name, verbosity=verbosity, **options)
    seeds = np.random.default_rng(config.seed).integers(0, 2**31 - 1, size=3)

    if config.toy == "nuisance":
        train, test, masks = gen_nuisance_dataset(
            n_train=config.n or 500, n_test_anomaly=config.anomalies or 50, seed=int(seeds[0])
        )
        write_csv(train, config.output, include_labels=False)
        write_csv(test, output_stem_path(config.output, "_test.csv"))
        write_csv(Dataset(masks, feature_names=test.feature_names), output_stem_path(config.output, "_masks.csv"), include_labels=False)
        click.echo(f"wrote {train.n} training rows and {test.n} test rows to {config.output}")
        return

    if config.toy == "uniform":
        data = sample_uniform_anomalies(TOY_BOUNDS, config.n or 100, seed=int(seeds[0]))
    else:
        data = gen_two_moons(TwoMoonsConfig(n_train=config.n or 1000), seed=int(seeds[0]))
        if config.contamination > 0:
            data = contaminate(data, ContaminationSpec(config.contamination, TOY_BOUNDS), seed=int(seeds[1]))
        if config.anomalies > 0:
            normal = Dataset(data.rows, np.full(data.n, int(Label.NORMAL)), data.feature_names)
            anomalies = sample_uniform_anomalies(TOY_BOUNDS, config.anomalies, seed=int(seeds[2]))
            data = Dataset.concat([normal, anomalies])

    write_csv(data, config.output, include_labels=data.has_labels)
    click.echo(f"wrote {data.n} rows to {config.output}")


@click.command()
@click.option('--method', '-m', type=str, help="Registered method name (see list-methods)")
@click.option('--in', 'input', type=str, help="Training CSV")
@click.option('--labels-col', 'labels_col', type=str, help="Name or index of the label column")
@click.option('--out', 'output', type=str, help="Checkpoint file to write")
@click.option('--kernel', type=click.Choice(KERNEL_KINDS), help="Kernel of kernel-based methods")
@click.option('--metric-diag', 'metric_diag', callback=parse_float_list_option, help="Diagonal of the Mahalanobis metric, comma-separated")
@click.option('--gamma', type=float, help="Kernel width")
@click.option('--nu', type=float, help="Outlier fraction bound of one-class methods")
@click.option('--k', 'k', type=int, help="Number of components or prototypes")
@click.option('--d', 'd', type=int, help="Latent dimension of PPCA")
@click.option('--bottleneck', type=int, help="Code size of neural methods")
@click.option('--param', 'hyperparameters', multiple=True, callback=parse_hyperparameters_option, help="Further hyperparameter as key=value")
@click.option('--seed', type=int, help="Seed passed to methods that draw random numbers")
@common_options
@report_errors("fit")
def fit(config_path, config_name, verbosity, **options):
    """Fit a detector and save it as a checkpoint."""
    manager, config = _prepare("fit", config_path, config_name, verbosity=verbosity, **options)
    if config.method not in method_registry.get_all_methods():
        raise ConfigError(
            f"unknown method '{config.method}'; known: {sorted(method_registry.get_all_methods())}", key="method"
        )
    method_def = method_registry.get_method(config.method)
    regularization = manager.method_regularization(config, method_def.parameters)

    data = load_csv(config.input, label_column=config.labels_col)
    dims = method_def.dimensions.with_regularization(**regularization)
    feature_map = _feature_map(method_def, config, data.dim)
    if feature_map is not None:
        dims = dims.with_feature_map(feature_map)

    labeled = None
    train = Dataset(data.rows, None, data.feature_names)
    if method_def.needs_labels:
        is_labeled = data.labels != int(Label.UNLABELED)
        labeled = data.subset(np.flatnonzero(is_labeled)) if is_labeled.any() else None
        if is_labeled.any() and not is_labeled.all():
            train = Dataset(data.rows[~is_labeled], None, data.feature_names)

    model = DetectorBuilder(method=method_def, dimensions=dims).fit(train, labeled)
    save_model(model, config.output)
    click.echo(f"saved {config.method} model to {config.output}")


@click.command()
@click.option('--model', type=str, help="Checkpoint written by fit")
@click.option('--in', 'input', type=str, help="CSV of rows to score")
@click.option('--labels-col', 'labels_col', type=str, help="Name or index of the label column")
@click.option('--out', 'output', type=str, help="Score CSV (row_id,score,label)")
@click.option('--threads', type=int, help="Scoring threads (default: $ANOSCOPE_THREADS or 1)")
@common_options
@report_errors("score")
def score(config_path, config_name, verbosity, **options):
    """Score rows with a saved detector."""
    _, config = _prepare("score", config_path, config_name, verbosity=verbosity, **options)
    model = load_model(config.model)
    data = load_csv(config.input, label_column=config.labels_col)
    scores = model.score_batch(data, threads=config.threads)
    write_scores_csv(scores, data.labels, config.output)
    click.echo(f"scored {data.n} rows into {config.output}")


@click.command(name="eval")
@click.option('--in', 'input', type=str, help="Score CSV written by score")
@click.option('--out', 'output', type=str, help="Report file")
@click.option('--format', 'format', type=click.Choice(REPORT_FORMATS), help="Report format")
@click.option('--k', 'ks', callback=parse_int_list_option, help="Comma-separated k values for precision@k / recall@k")
@click.option('--alpha', type=float, help="Calibrate tau as the level-alpha quantile of the normal rows' scores")
@click.option('--tau', type=float, help="Fixed decision threshold")
@common_options
@report_errors("eval")
def eval_scores(config_path, config_name, verbosity, **options):
    """Threshold-free metrics (and optionally rates at a threshold) of a score file."""
    _, config = _prepare("eval", config_path, config_name, verbosity=verbosity, **options)
    scores, labels = load_scores_csv(config.input)
    labeled = labels != int(Label.UNLABELED)
    ls = LabeledScores.from_labels(scores[labeled], labels[labeled])

    threshold = None
    if config.tau is not None:
        threshold = DecisionThreshold(tau=config.tau, alpha=config.alpha if config.alpha is not None else 0.0)
    elif config.alpha is not None:
        threshold = calibrate_threshold(ls.scores[~ls.is_anomaly], config.alpha)

    report = evaluate(ls, ks=config.ks, threshold=threshold)
    write_report(report, config.output, fmt=config.format)
    click.echo(f"AUROC {report.auroc:.4f}, AP {report.ap:.4f}; report written to {config.output}")


@click.command()
@click.option('--model', type=str, help="KDE checkpoint written by fit")
@click.option('--in', 'input', type=str, help="CSV of probes to explain")
@click.option('--labels-col', 'labels_col', type=str, help="Name or index of the label column")
@click.option('--out', 'output', type=str, help="Heatmap CSV (probe_id,score,R_1..R_D)")
@click.option('--masks', type=str, help="CSV of ground-truth masks, one row per probe")
@click.option('--gradient', type=click.Choice([m.value for m in GradientMode]), help="Gradient computation")
@click.option('--wrt', type=click.Choice([t.value for t in GradientTarget]), help="Expansion variable")
@click.option('--pgm-shape', 'pgm_shape', callback=parse_int_list_option, help="Also write each heatmap as a HEIGHT,WIDTH PGM image")
@common_options
@report_errors("explain")
def explain(config_path, config_name, verbosity, **options):
    """Relevance heatmaps of a KDE detector's scores."""
    _, config = _prepare("explain", config_path, config_name, verbosity=verbosity, **options)
    model = load_model(config.model)
    if not isinstance(model, KDEModel):
        raise ConfigError(f"explain needs a KDE checkpoint, got {type(model).__name__}", key="model")
    probes = load_csv(config.input, label_column=config.labels_col)

    heatmaps = heatmap_batch(model, probes.rows, gradient=config.gradient, wrt=config.wrt)
    write_heatmaps_csv(heatmaps, config.output)
    click.echo(f"wrote {len(heatmaps)} heatmaps to {config.output}")

    if config.pgm_shape is not None:
        height, width = config.pgm_shape
        if height * width != model.n_features:
            raise ConfigError(f"pgm shape {height}x{width} does not hold {model.n_features} features", key="pgm_shape")
        for i, heatmap in enumerate(heatmaps):
            write_heatmap_pgm(heatmap.relevance.reshape(height, width), output_stem_path(config.output, f"_{i}.pgm"))

    if config.masks is not None:
        masks = load_csv(config.masks)
        accuracy = mean_explanation_accuracy(model, probes.rows, masks.rows, gradient=config.gradient, wrt=config.wrt)
        path = _write_json(
            {"mean_explanation_accuracy": accuracy, "n_probes": probes.n},
            output_stem_path(config.output, "_accuracy.json"),
        )
        click.echo(f"mean explanation accuracy {accuracy:.4f} written to {path}")


@click.command(name="bench-toy")
@click.option('--seed', 'seeds', type=int, multiple=True, help="Seed of one benchmark repetition (repeatable)")
@click.option('--n', 'n', type=int, help="Training rows per seed")
@click.option('--methods', callback=parse_list_option, help="Comma-separated subset of methods")
@click.option('--tune-kernels/--fixed-kernels', 'tune_kernels', default=None, help="Pick SVDD/OC-SVM (nu, gamma) on a labeled hold-out and the kPCA width by neighbour similarity")
@click.option('--threads', type=int, help="Worker threads")
@click.option('--out', 'output', type=str, help="Result table CSV")
@common_options
@report_errors("bench-toy")
def bench_toy(config_path, config_name, verbosity, **options):
    """Seed-averaged AUROC of every method on the two-moons benchmark."""
    _, config = _prepare("bench-toy", config_path, config_name, verbosity=verbosity, **options)
    unknown = sorted(set(config.methods) - set(DEFAULT_TOY_METHODS))
    if unknown:
        raise ConfigError(f"no benchmark settings for {unknown}; known: {sorted(DEFAULT_TOY_METHODS)}", key="methods")
    methods = {name: DEFAULT_TOY_METHODS[name] for name in config.methods} if config.methods else None
    toy = TwoMoonsConfig(n_train=config.n) if config.n else None

    output = run_bench_toy(
        seeds=config.seeds or DEFAULT_SEEDS,
        toy=toy,
        methods=methods,
        threads=config.threads,
        tune_kernels=config.tune_kernels,
    )
    write_bench_table(output, config.output)
    for row in output.table:
        click.echo(f"  {row['method']:24} AUROC {row['auroc_mean']:.4f} +/- {row['auroc_std']:.4f}")


@click.command(name="thyroid-pipeline")
@click.option('--data', '--in', 'input', type=str, help="Labeled thyroid CSV")
@click.option('--labels-col', 'labels_col', type=str, help="Name or index of the label column (default: last column)")
@click.option('--nu', type=float, help=f"OC-SVM nu (default {THYROID_NU})")
@click.option('--seed', type=int, help="Split seed")
@click.option('--scale/--no-scale', default=None, help="Robust-scale features before the gamma search")
@click.option('--threads', type=int, help="Grid-search threads")
@click.option('--out', 'output', type=str, help="JSON report")
@common_options
@report_errors("thyroid-pipeline")
def thyroid_pipeline(config_path, config_name, verbosity, **options):
    """Robust scaling, 60:10:30 split, OC-SVM gamma search and test report."""
    _, config = _prepare("thyroid-pipeline", config_path, config_name, verbosity=verbosity, **options)
    data = load_csv(config.input, label_column=config.labels_col if config.labels_col is not None else -1)
    output = run_thyroid_pipeline(
        data,
        nu=config.nu if config.nu is not None else THYROID_NU,
        seed=config.seed,
        scale=config.scale,
        threads=config.threads,
    )
    _write_json(output.to_dict(), config.output)
    test = output.metrics["test"]
    click.echo(
        f"gamma {output.metadata['selected_gamma']:.6g}: test AUROC {test['auroc']:.4f}, "
        f"false alarms {test['threshold']['false_alarm_rate']:.3f}, misses {test['threshold']['miss_rate']:.3f}"
    )


@click.command(name="list-methods")
def list_methods():
    """List registered detectors and their defaults."""
    for line in method_listing():
        click.echo(line)


cli.add_command(generate)
cli.add_command(fit)
cli.add_command(score)
cli.add_command(eval_scores)
cli.add_command(explain)
cli.add_command(bench_toy)
cli.add_command(thyroid_pipeline)
cli.add_command(list_methods)


def main():
    """
    Entrypoint for anoscope cli tool implemented using Click.
    """
    cli()
