import json
import logging
import os

import pytest
import yaml
from click.testing import CliRunner

from src.anoscope.checkpoint import read_header
from src.cli.cli_main import cli
from src.utils.env import THYROID_ENV
from src.utils.logging import get_logger, setup_cli_logging


def _run(*args):
    result = CliRunner().invoke(cli, [str(a) for a in args])
    return result


def _error_payload(result):
    return json.loads(result.output.strip().splitlines()[-1])


@pytest.fixture
def toy_files(tmp_path):
    train, test = tmp_path / "train.csv", tmp_path / "test.csv"
    assert _run("generate", "--toy", "two-moons", "--n", 200, "--seed", 1, "--out", train).exit_code == 0
    assert _run("generate", "--toy", "two-moons", "--n", 100, "--anomalies", 20, "--seed", 2, "--out", test).exit_code == 0
    return train, test


def test_generate_writes_csv(toy_files):
    train, test = toy_files
    assert train.read_text().splitlines()[0] == "x1,x2"
    assert len(train.read_text().splitlines()) == 201
    lines = test.read_text().splitlines()
    assert lines[0] == "x1,x2,label"
    assert sum(line.endswith(",-1") for line in lines[1:]) == 20


def test_generate_nuisance_writes_sidecars(tmp_path):
    out = tmp_path / "nuisance.csv"
    result = _run("generate", "--toy", "nuisance", "--n", 50, "--anomalies", 5, "--out", out)
    assert result.exit_code == 0, result.output
    assert (tmp_path / "nuisance_test.csv").exists()
    assert (tmp_path / "nuisance_masks.csv").exists()


def test_fit_score_eval_explain(tmp_path, toy_files):
    train, test = toy_files
    model, scores, report, heatmaps = (tmp_path / name for name in ("kde.npz", "scores.csv", "report.json", "hm.csv"))

    result = _run("fit", "--method", "kde", "--gamma", 2.0, "--in", train, "--out", model)
    assert result.exit_code == 0, result.output
    assert read_header(model)["summary"]["class"] == "KDEModel"

    result = _run("score", "--model", model, "--in", test, "--labels-col", "label", "--out", scores)
    assert result.exit_code == 0, result.output
    assert scores.read_text().splitlines()[0] == "row_id,score,label"

    result = _run("eval", "--in", scores, "--out", report, "--k", "10,20", "--alpha", 0.1)
    assert result.exit_code == 0, result.output
    payload = json.loads(report.read_text())
    assert 0.5 < payload["auroc"] <= 1.0
    assert set(payload["precision_at_k"]) == {"10", "20"}
    assert payload["threshold"]["alpha"] == 0.1
    # the calibration point itself sits at tau and is flagged
    assert payload["threshold"]["false_alarm_rate"] <= 0.1 + 1 / 100 + 1e-12

    result = _run("explain", "--model", model, "--in", test, "--labels-col", "label", "--out", heatmaps)
    assert result.exit_code == 0, result.output
    lines = heatmaps.read_text().splitlines()
    assert lines[0] == "probe_id,score,R_1,R_2"
    assert len(lines) == 121


def test_fit_with_labels_and_config_file(tmp_path, toy_files):
    _, test = toy_files
    config = tmp_path / "run.yaml"
    config.write_text(
        yaml.safe_dump(
            {"fit": {"method": "semi-supervised-svdd", "labels_col": "label", "hyperparameters": {"nu": 0.1}}}
        )
    )
    result = _run("fit", "--config", config, "--gamma", 1.0, "--in", test, "--out", tmp_path / "sssvdd.npz")
    assert result.exit_code == 0, result.output
    assert read_header(tmp_path / "sssvdd.npz")["summary"]["class"] == "SVDDModel"


def test_missing_required_option_is_a_config_error(tmp_path, toy_files):
    train, _ = toy_files
    result = _run("fit", "--in", train, "--out", tmp_path / "m.npz")
    assert result.exit_code == 2
    payload = _error_payload(result)
    assert payload == {"command": "fit", "error": "ConfigError", "message": payload["message"]}
    assert "method" in payload["message"]


def test_unknown_method_and_config_keys(tmp_path, toy_files):
    train, _ = toy_files
    result = _run("fit", "--method", "isolation-forest", "--in", train, "--out", tmp_path / "m.npz")
    assert result.exit_code == 2

    config = tmp_path / "bad.yaml"
    config.write_text("methd: kde\n")
    result = _run("fit", "--config", config, "--in", train, "--out", tmp_path / "m.npz")
    assert result.exit_code == 2
    assert _error_payload(result)["error"] == "ConfigError"


def test_flag_the_method_does_not_take(tmp_path, toy_files):
    train, _ = toy_files
    result = _run("fit", "--method", "pca", "--nu", 0.1, "--in", train, "--out", tmp_path / "m.npz")
    assert result.exit_code == 2


def test_library_errors_exit_with_one(tmp_path, toy_files):
    _, test = toy_files
    result = _run("score", "--model", tmp_path / "missing.npz", "--in", test, "--out", tmp_path / "s.csv")
    assert result.exit_code == 1
    assert _error_payload(result)["error"] == "MissingFile"


def test_explain_needs_a_kde_checkpoint(tmp_path, toy_files):
    train, test = toy_files
    model = tmp_path / "pca.npz"
    assert _run("fit", "--method", "pca", "--in", train, "--out", model).exit_code == 0
    result = _run("explain", "--model", model, "--in", test, "--labels-col", "label", "--out", tmp_path / "hm.csv")
    assert result.exit_code == 2


def test_bench_toy(tmp_path):
    out = tmp_path / "bench.csv"
    result = _run("bench-toy", "--seed", 0, "--seed", 1, "--n", 100, "--methods", "gaussian,kde", "--out", out)
    assert result.exit_code == 0, result.output
    lines = out.read_text().splitlines()
    assert lines[0] == "method,auroc_mean,auroc_std,auroc_seed_0,auroc_seed_1"
    assert len(lines) == 3


def test_bench_toy_tune_kernels_flag(tmp_path):
    out = tmp_path / "bench.csv"
    result = _run("bench-toy", "--seed", 0, "--n", 120, "--methods", "svdd,kpca", "--tune-kernels", "--out", out)
    assert result.exit_code == 0, result.output
    lines = out.read_text().splitlines()
    assert [line.split(",")[0] for line in lines[1:]] == ["svdd", "kpca"]


def test_bench_toy_rejects_unknown_methods(tmp_path):
    result = _run("bench-toy", "--methods", "gaussian,deep-sad", "--out", tmp_path / "bench.csv")
    assert result.exit_code == 2


def test_list_methods():
    result = _run("list-methods")
    assert result.exit_code == 0
    assert "One-class classification methods:" in result.output
    assert "deep-sad" in result.output
    assert "[needs labels]" in result.output


@pytest.mark.skipif(not os.getenv(THYROID_ENV), reason=f"set {THYROID_ENV} to the thyroid CSV")
def test_thyroid_pipeline_on_real_data(tmp_path):
    out = tmp_path / "thyroid.json"
    result = _run("thyroid-pipeline", "--data", os.environ[THYROID_ENV], "--threads", 2, "--out", out)
    assert result.exit_code == 0, result.output
    report = json.loads(out.read_text())
    assert report["metadata"]["split_sizes"] == [pytest.approx(2263, abs=2), pytest.approx(377, abs=2), pytest.approx(1132, abs=2)]
    assert report["metrics"]["test"]["auroc"] > 0.9


@pytest.mark.parametrize(
    "verbosity, level",
    [(0, logging.CRITICAL), (3, logging.INFO), (4, logging.DEBUG), (9, logging.DEBUG)],
)
def test_setup_cli_logging_levels(verbosity, level):
    setup_cli_logging(verbosity)
    assert logging.getLogger().level == level
    assert get_logger("anoscope.cli-test", verbosity=verbosity).level == level
