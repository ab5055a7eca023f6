"""End-to-end tests of the command-line interface."""

import json

import numpy as np
import pytest

from cpdlab.cli import main
from cpdlab.dataio import load_dataset, save_values
from cpdlab.simulate import gen_piecewise


def run(argv):
    return main([str(a) for a in argv])


def test_simulate_writes_expected_schema(tmp_path):
    out = tmp_path / "d.csv"
    code = run(["simulate", "--scenario", "S1", "--n", 100, "--N", 40,
                "--seed", 7, "--out", out])
    assert code == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 41
    assert lines[0].startswith("label,tau,x1,") and lines[0].endswith(",x100")
    ds = load_dataset(out)
    assert len(ds) == 40 and ds.n == 100


def test_simulate_same_argv_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(["simulate", "--scenario", "S2", "--N", 20, "--seed", 3, "--out", a])
    run(["simulate", "--scenario", "S2", "--N", 20, "--seed", 3, "--out", b])
    assert a.read_bytes() == b.read_bytes()


def test_seed_env_fallback_and_flag_priority(tmp_path, monkeypatch):
    a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    monkeypatch.setenv("CPD_SEED", "11")
    run(["simulate", "--N", 10, "--out", a])
    monkeypatch.delenv("CPD_SEED")
    run(["simulate", "--N", 10, "--seed", 11, "--out", b])
    run(["simulate", "--N", 10, "--seed", 12, "--out", c])
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()


def test_train_detect_evaluate_pipeline(tmp_path):
    train_csv = tmp_path / "train.csv"
    test_csv = tmp_path / "test.csv"
    net_json = tmp_path / "net.json"
    run(["simulate", "--scenario", "S1", "--N", 200, "--seed", 1, "--out", train_csv])
    run(["simulate", "--scenario", "S1", "--N", 200, "--seed", 2, "--role", "test",
         "--out", test_csv])
    code = run(["train", "--data", train_csv, "--hidden", "24", "--epochs", 20,
                "--seed", 5, "--out", net_json])
    assert code == 0
    payload = json.loads(net_json.read_text())
    assert payload["schema_version"] == 1

    report_json = tmp_path / "detect.json"
    code = run(["detect", "--method", "net", "--net", net_json, "--data", test_csv,
                "--out", report_json])
    assert code == 0
    report = json.loads(report_json.read_text())
    assert 0.0 <= report["report"]["mer"] <= 0.5
    assert len(report["decisions"]) == 200

    eval_json = tmp_path / "eval.json"
    code = run(["evaluate", "--method", "cusum", "--train", train_csv,
                "--test", test_csv, "--out", eval_json])
    assert code == 0
    assert json.loads(eval_json.read_text())["report"]["mer"] < 0.5


def test_detect_requires_threshold_for_scans(tmp_path):
    data = tmp_path / "d.csv"
    run(["simulate", "--N", 10, "--out", data])
    out = tmp_path / "r.json"
    assert run(["detect", "--method", "cusum", "--data", data, "--out", out]) == 2


def test_localise_command(tmp_path):
    series, _ = gen_piecewise(2000, [900], [0.0, 9.0], seed=0, min_spacing=256)
    data = tmp_path / "series.csv"
    save_values(series[None, :], data)
    out = tmp_path / "loc.json"
    code = run(["localise", "--data", data, "--window", 128, "--snr-bound", 1.8,
                "--out", out])
    assert code == 0
    result = json.loads(out.read_text())
    assert result["results"][0]["change_points"] == [900]


def test_reproduce_writes_report_and_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(["reproduce", "grid-check", "--seed", 7, "--out", a]) == 0
    assert run(["reproduce", "grid-check", "--seed", 7, "--out", b]) == 0
    assert a.read_bytes() == b.read_bytes()
    report = json.loads(a.read_text())
    assert report["passed"] is True and report["violations"] == 0


def test_exit_codes(tmp_path):
    # unknown recipe -> argparse error 2
    assert run(["reproduce", "figZZ", "--out", tmp_path / "x.json"]) == 2
    # missing file -> config error 2
    assert run(["detect", "--method", "cusum", "--threshold", 1.0,
                "--data", tmp_path / "absent.csv", "--out", tmp_path / "y.json"]) == 2
    # bad scenario -> 2
    assert run(["simulate", "--scenario", "S9", "--out", tmp_path / "z.csv"]) == 2
    # bad threads -> 2
    assert run(["simulate", "--threads", 0, "--out", tmp_path / "w.csv"]) == 2


def test_detect_flat_csv_output(tmp_path):
    data = tmp_path / "d.csv"
    run(["simulate", "--scenario", "S1", "--N", 20, "--seed", 4, "--out", data])
    out = tmp_path / "decisions.csv"
    code = run(["detect", "--method", "cusum", "--threshold", 3.0,
                "--data", data, "--out", out])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "row,label,decision,statistic"
    assert len(lines) == 21
    fields = lines[1].split(",")
    assert fields[0] == "1" and fields[2] in ("0", "1")
    float(fields[3])  # statistic parses back


def test_runtime_failure_exits_one(tmp_path):
    data = tmp_path / "d.csv"
    run(["simulate", "--N", 20, "--seed", 6, "--out", data])
    out = tmp_path / "net.json"
    with np.errstate(all="ignore"):  # divergence overflows by design
        code = run(["train", "--data", data, "--hidden", "4", "--epochs", 5,
                    "--learning-rate", "1e155", "--seed", 0, "--out", out])
    assert code == 1
