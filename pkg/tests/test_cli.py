import json
import os
import subprocess
import sys

import numpy as np
import pytest

from depaft import read_csv
from depaft.cli import main
from depaft.dataset import read_predictions_csv
from depaft.loss import ClaytonAftLoss, loss_from_config

SIM_CFG = {
    "n": 400,
    "c": 1.49,
    "copula": {"family": "clayton", "theta": 3.0},
    "seed": 7,
}

TRAIN_CFG = {
    "loss": {
        "loss": "clayton",
        "theta": 3.0,
        "event_baseline": {"family": "extreme", "sigma": 1 / 3},
        "censor_baseline": {"family": "extreme", "sigma": 1 / 3},
    },
    "train": {"rounds": 20, "learning_rate": 0.1, "max_depth": 2, "seed": 0},
}


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture()
def sim_dir(tmp_path):
    cfg = _write(tmp_path / "sim.json", SIM_CFG)
    out = tmp_path / "sim"
    assert main(["simulate", "--config", cfg, "--out", str(out), "--quiet"]) == 0
    return out


def test_simulate_outputs(sim_dir, capsys):
    data = read_csv(sim_dir / "data.csv")
    assert data.n == 400
    assert data.has_oracle
    meta = json.loads((sim_dir / "metadata.json").read_text())
    assert 0.4 < meta["censoring_fraction"] < 0.6
    assert meta["event_baseline"]["family"] == "extreme"


def test_simulate_prints_censoring(tmp_path, capsys):
    cfg = _write(tmp_path / "sim.json", SIM_CFG)
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    assert "censoring fraction" in capsys.readouterr().out


def test_simulate_deterministic(tmp_path):
    cfg = _write(tmp_path / "sim.json", SIM_CFG)
    for name in ("a", "b"):
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path / name), "--quiet"]) == 0
    assert (tmp_path / "a" / "data.csv").read_bytes() == (tmp_path / "b" / "data.csv").read_bytes()


def test_simulate_bad_config_exit_2(tmp_path):
    cfg = _write(tmp_path / "sim.json", {**SIM_CFG, "n": 0})
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o"), "--quiet"]) == 2


def test_train_predict_evaluate_pipeline(sim_dir, tmp_path, capsys):
    train_cfg = _write(tmp_path / "train.json", TRAIN_CFG)
    model_path = tmp_path / "model.json"
    assert main([
        "train", "--data", str(sim_dir / "data.csv"), "--config", train_cfg,
        "--out", str(model_path),
    ]) == 0
    printed = capsys.readouterr().out
    assert "final training loss" in printed

    preds_path = tmp_path / "preds.csv"
    assert main([
        "predict", "--model", str(model_path), "--data", str(sim_dir / "data.csv"),
        "--out", str(preds_path), "--quiet",
    ]) == 0
    log_pred, pred = read_predictions_csv(preds_path)
    assert np.allclose(pred, np.exp(log_pred), rtol=1e-15)

    # the printed final training loss is reproducible from the artifacts
    data = read_csv(sim_dir / "data.csv")
    model_doc = json.loads(model_path.read_text())
    loss = loss_from_config(model_doc["loss"])
    assert isinstance(loss, ClaytonAftLoss)
    final = float(np.mean(loss.loss(data.times, data.events, log_pred)))
    assert repr(final) in printed

    eval_dir = tmp_path / "eval"
    assert main([
        "evaluate", "--predictions", str(preds_path), "--data", str(sim_dir / "data.csv"),
        "--out", str(eval_dir), "--quiet",
    ]) == 0
    metrics = json.loads((eval_dir / "metrics.json").read_text())
    assert {"c_index", "mae", "event_mae", "n_rows", "n_events"} <= set(metrics)
    cal_lines = (eval_dir / "calibration.csv").read_text().strip().splitlines()
    assert cal_lines[0] == "horizon,predicted_proportion,observed_proportion"
    assert len(cal_lines) == 10  # 9 horizons by default


def test_evaluate_without_oracle_flags_warning(sim_dir, tmp_path):
    data = read_csv(sim_dir / "data.csv")
    bare = tmp_path / "bare.csv"
    from depaft.dataset import SurvivalDataset, write_csv

    write_csv(SurvivalDataset(data.times, data.events, data.X), bare)
    train_cfg = _write(tmp_path / "train.json", TRAIN_CFG)
    model_path = tmp_path / "model.json"
    main(["train", "--data", str(bare), "--config", train_cfg, "--out", str(model_path), "--quiet"])
    preds = tmp_path / "p.csv"
    main(["predict", "--model", str(model_path), "--data", str(bare), "--out", str(preds), "--quiet"])
    out = tmp_path / "eval"
    assert main(["evaluate", "--predictions", str(preds), "--data", str(bare),
                 "--out", str(out), "--quiet"]) == 0
    metrics = json.loads((out / "metrics.json").read_text())
    assert "mae" not in metrics
    assert "warning" in metrics
    assert metrics["calibration_reference"] == "observed_time"


def test_evaluate_row_mismatch_exit_3(sim_dir, tmp_path):
    preds = tmp_path / "p.csv"
    preds.write_text("predicted_log_time,predicted_time\n0.0,1.0\n")
    out = tmp_path / "eval"
    assert main(["evaluate", "--predictions", str(preds), "--data", str(sim_dir / "data.csv"),
                 "--out", str(out), "--quiet"]) == 3


def test_train_unknown_loss_exit_2(sim_dir, tmp_path):
    cfg = _write(tmp_path / "t.json", {"loss": {"loss": "coxph"}})
    assert main(["train", "--data", str(sim_dir / "data.csv"), "--config", cfg,
                 "--out", str(tmp_path / "m.json"), "--quiet"]) == 2


def test_train_corrupt_csv_exit_3(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("time,event,x1\n1.0,1,0.5\noops,1,0.5\n")
    cfg = _write(tmp_path / "t.json", TRAIN_CFG)
    assert main(["train", "--data", str(bad), "--config", cfg,
                 "--out", str(tmp_path / "m.json"), "--quiet"]) == 3


def test_predict_feature_mismatch_exit_3(sim_dir, tmp_path):
    train_cfg = _write(tmp_path / "train.json", TRAIN_CFG)
    model_path = tmp_path / "model.json"
    main(["train", "--data", str(sim_dir / "data.csv"), "--config", train_cfg,
          "--out", str(model_path), "--quiet"])
    narrow = tmp_path / "narrow.csv"
    narrow.write_text("time,event,x1\n1.0,1,0.5\n2.0,0,0.25\n")
    assert main(["predict", "--model", str(model_path), "--data", str(narrow),
                 "--out", str(tmp_path / "p.csv"), "--quiet"]) == 3


def test_cv_single_point_and_grid(sim_dir, tmp_path):
    cfg = _write(
        tmp_path / "cv.json",
        {
            **TRAIN_CFG,
            "cv": {"folds": 2, "max_rounds": 20, "checkpoint_stride": 10,
                    "theta_grid": [1.1, 1.3, 1.5, 1.8, 2.0], "seed": 1},
        },
    )
    out = tmp_path / "cv"
    assert main(["cv", "--data", str(sim_dir / "data.csv"), "--config", cfg,
                 "--out", str(out), "--quiet"]) == 0
    result = json.loads((out / "cv_results.json").read_text())
    assert result["selection_metric"] == "c_index"
    assert {p["theta"] for p in result["points"]} == {1.1, 1.3, 1.5, 1.8, 2.0}
    for p in result["points"]:
        assert len(p["fold_scores"]) == 2
    assert (out / "model.json").exists()


def test_cli_via_subprocess(tmp_path):
    # the installed console entry point works end to end
    cfg = tmp_path / "sim.json"
    cfg.write_text(json.dumps({**SIM_CFG, "n": 50}))
    proc = subprocess.run(
        [sys.executable, "-m", "depaft.cli", "simulate", "--config", str(cfg),
         "--out", str(tmp_path / "out")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "out" / "data.csv").exists()


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["simulate"])  # missing required flags
    assert exc.value.code == 2
