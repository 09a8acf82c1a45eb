import json
import math

import jsonschema
import pytest

from bellsim.chsh import InternalConsistencyError, TSIRELSON_BOUND
from bellsim.cli import REPORT_SCHEMA, main

INV_SQRT2 = 1.0 / math.sqrt(2.0)


def run_cli(capsys, *args):
    code = main(list(args))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *args):
    code, out, err = run_cli(capsys, *args)
    assert code == 0, err
    report = json.loads(out)
    jsonschema.validate(report, REPORT_SCHEMA)
    return report


# --- chsh ----------------------------------------------------------------


def test_chsh_singlet_optimal(capsys):
    report = run_json(capsys, "chsh", "--state", "singlet", "--preset", "optimal")
    results = report["results"]
    assert results["s_value"] == pytest.approx(TSIRELSON_BOUND, abs=1e-12)
    assert results["violates_classical"] is True
    assert results["within_tsirelson"] is True
    assert results["correlators"]["e11"] == pytest.approx(INV_SQRT2, abs=1e-12)
    assert results["correlators"]["e22"] == pytest.approx(-INV_SQRT2, abs=1e-12)


def test_chsh_explicit_aligned_angles(capsys):
    report = run_json(
        capsys, "chsh", "--state", "singlet",
        "--a1", "0", "0", "--a2", "0", "0", "--b1", "0", "0", "--b2", "0", "0",
    )
    assert report["results"]["s_value"] == pytest.approx(-2.0, abs=1e-12)
    assert report["results"]["violates_classical"] is False


def test_chsh_werner_scales(capsys):
    report = run_json(capsys, "chsh", "--state", "werner:0.5", "--preset", "optimal")
    assert report["results"]["s_value"] == pytest.approx(math.sqrt(2.0), abs=1e-12)


def test_chsh_requires_settings(capsys):
    code, _, err = run_cli(capsys, "chsh", "--state", "singlet")
    assert code == 2
    assert "preset" in err


def test_chsh_rejects_preset_and_angles(capsys):
    code, _, _ = run_cli(
        capsys, "chsh", "--preset", "optimal",
        "--a1", "0", "0", "--a2", "0", "0", "--b1", "0", "0", "--b2", "0", "0",
    )
    assert code == 2


def test_chsh_rejects_partial_angles(capsys):
    code, _, _ = run_cli(capsys, "chsh", "--a1", "0", "0")
    assert code == 2


def test_chsh_rejects_out_of_range_angles(capsys):
    code, _, _ = run_cli(
        capsys, "chsh", "--a1", "-1", "0", "--a2", "0", "0", "--b1", "0", "0", "--b2", "0", "0"
    )
    assert code == 2


# --- optimize ----------------------------------------------------------------


def test_optimize_singlet(capsys):
    report = run_json(capsys, "optimize", "--state", "singlet")
    assert report["results"]["s_value"] == pytest.approx(TSIRELSON_BOUND, abs=1e-6)
    assert report["diagnostics"]["starts"] >= 1


def test_optimize_threshold_werner(capsys):
    report = run_json(capsys, "optimize", "--state", "werner:0.7071")
    assert report["results"]["s_value"] == pytest.approx(2.0, abs=1e-3)


def test_optimize_white_noise(capsys):
    report = run_json(capsys, "optimize", "--state", "werner:0")
    assert abs(report["results"]["s_value"]) <= 1e-6


def test_optimize_rejects_bad_state(capsys):
    for spec in ("werner:1.5", "werner:abc", "ghz"):
        code, _, _ = run_cli(capsys, "optimize", "--state", spec)
        assert code == 2


# --- werner-sweep ----------------------------------------------------------------


def test_werner_sweep_monotone_and_threshold(capsys):
    report = run_json(capsys, "werner-sweep", "--points", "9")
    rows = report["results"]["rows"]
    assert len(rows) == 9
    values = [row["max_s"] for row in rows]
    assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))
    assert rows[-1]["p"] == 1.0
    assert rows[-1]["max_s"] == pytest.approx(TSIRELSON_BOUND, abs=1e-4)
    assert report["results"]["threshold"] == pytest.approx(INV_SQRT2, abs=1e-4)
    assert report["results"]["threshold_row"]["max_s"] == pytest.approx(2.0, abs=1e-3)


def test_werner_sweep_csv(capsys):
    code, out, err = run_cli(capsys, "werner-sweep", "--points", "5", "--format", "csv")
    assert code == 0, err
    lines = out.strip().split("\n")
    assert lines[0] == "p,max_s,violates"
    assert len(lines) == 7  # 5 sweep rows + threshold row + header
    last = lines[-1].split(",")
    assert float(last[0]) == pytest.approx(INV_SQRT2, abs=1e-4)


def test_werner_sweep_rejects_bad_range(capsys):
    assert run_cli(capsys, "werner-sweep", "--p-min", "-0.5")[0] == 2
    assert run_cli(capsys, "werner-sweep", "--p-max", "1.5")[0] == 2
    assert run_cli(capsys, "werner-sweep", "--points", "1")[0] == 2


# --- lhv ----------------------------------------------------------------


def test_lhv_exhaustive(capsys):
    report = run_json(capsys, "lhv", "--exhaustive")
    assert report["results"]["classical_bound"] == 2.0
    assert sorted(set(report["results"]["pattern_values"])) == [-2.0, 2.0]
    assert len(report["results"]["pattern_labels"]) == 16


def test_lhv_uniform16_sampling(capsys):
    report = run_json(capsys, "lhv", "--preset", "uniform16", "--trials", "100000", "--seed", "7")
    estimate = report["results"]["estimate"]
    for e, se in zip(estimate["table"].values(), estimate["std_errors"]):
        assert abs(e) <= 4.0 * se
    assert report["results"]["s_value"] == 0.0


def test_lhv_delta_weights(capsys):
    weights = ["1"] + ["0"] * 15
    report = run_json(capsys, "lhv", "--weights", *weights)
    assert report["results"]["s_value"] == 2.0
    assert report["results"]["estimate"] is None


def test_lhv_rejects_unnormalized_weights(capsys):
    weights = ["0.5"] + ["0"] * 15
    code, _, err = run_cli(capsys, "lhv", "--weights", *weights)
    assert code == 2
    assert "sum" in err


def test_lhv_requires_exactly_one_model(capsys):
    assert run_cli(capsys, "lhv")[0] == 2
    assert run_cli(capsys, "lhv", "--exhaustive", "--preset", "uniform16")[0] == 2


def test_lhv_exhaustive_rejects_trials(capsys):
    assert run_cli(capsys, "lhv", "--exhaustive", "--trials", "100")[0] == 2


# --- sample ----------------------------------------------------------------


def test_sample_singlet_optimal(capsys):
    report = run_json(
        capsys, "sample", "--state", "singlet", "--preset", "optimal",
        "--trials", "200000", "--seed", "1",
    )
    estimate = report["results"]["estimate"]
    assert abs(estimate["s_estimate"] - TSIRELSON_BOUND) <= 4.0 * estimate["s_std_error"]
    assert sum(estimate["counts"]) == 200000
    assert report["results"]["exact_s"] == pytest.approx(TSIRELSON_BOUND, abs=1e-12)


def test_sample_rejects_zero_trials(capsys):
    code, _, _ = run_cli(capsys, "sample", "--state", "singlet", "--preset", "optimal", "--trials", "0")
    assert code == 2


def test_sample_requires_trials(capsys):
    code, _, _ = run_cli(capsys, "sample", "--state", "singlet", "--preset", "optimal")
    assert code == 2


def test_sample_stdout_reproducible(capsys):
    args = ("sample", "--state", "werner:0.6", "--preset", "optimal", "--trials", "50000", "--seed", "5")
    _, out1, _ = run_cli(capsys, *args)
    _, out2, _ = run_cli(capsys, *args)
    assert out1 == out2
    _, out3, _ = run_cli(capsys, "sample", "--state", "werner:0.6", "--preset", "optimal",
                         "--trials", "50000", "--seed", "6")
    assert out1 != out3


def test_sample_trial_log_reproducible(capsys, tmp_path):
    logs = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        code, _, err = run_cli(
            capsys, "sample", "--state", "singlet", "--preset", "optimal",
            "--trials", "20000", "--seed", "11", "--trial-log", str(path),
        )
        assert code == 0, err
        logs.append(path.read_bytes())
    assert logs[0] == logs[1]
    header = logs[0].split(b"\n", 1)[0]
    assert header == b"trial,a_setting,b_setting,a_outcome,b_outcome"


# --- shared plumbing ----------------------------------------------------------------


def test_out_file_receives_machine_report(capsys, tmp_path):
    out_path = tmp_path / "report.json"
    code, out, _ = run_cli(
        capsys, "chsh", "--state", "singlet", "--preset", "optimal", "--out", str(out_path)
    )
    assert code == 0
    report = json.loads(out_path.read_text())
    jsonschema.validate(report, REPORT_SCHEMA)
    assert "S" in out  # human summary moved to stdout


def test_csv_keyvalue_format(capsys):
    code, out, _ = run_cli(capsys, "chsh", "--state", "singlet", "--preset", "optimal",
                           "--format", "csv")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "key,value"
    s_rows = [line for line in lines if line.startswith("results.s_value,")]
    assert len(s_rows) == 1
    assert float(s_rows[0].split(",")[1]) == pytest.approx(TSIRELSON_BOUND, abs=1e-12)


def test_config_file_supplies_defaults(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("seed = 123\ntrials = 5000\n# comment\nformat = json\n")
    report = run_json(
        capsys, "sample", "--state", "singlet", "--preset", "optimal", "--config", str(cfg)
    )
    assert report["inputs"]["seed"] == 123
    assert report["inputs"]["trials"] == 5000


def test_flags_override_config(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("seed = 123\n")
    report = run_json(
        capsys, "sample", "--state", "singlet", "--preset", "optimal",
        "--trials", "1000", "--seed", "9", "--config", str(cfg),
    )
    assert report["inputs"]["seed"] == 9


def test_config_rejects_unknown_key(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("bogus = 1\n")
    code, _, err = run_cli(capsys, "chsh", "--preset", "optimal", "--config", str(cfg))
    assert code == 2
    assert "bogus" in err


def test_unknown_preset_exits_two(capsys):
    code, _, _ = run_cli(capsys, "chsh", "--preset", "diagonal")
    assert code == 2


def test_help_exits_zero(capsys):
    assert run_cli(capsys, "--help")[0] == 0
    assert run_cli(capsys, "chsh", "--help")[0] == 0


def test_internal_error_exits_one(capsys, monkeypatch):
    def boom(*args, **kwargs):
        raise InternalConsistencyError("imaginary residue")

    monkeypatch.setattr("bellsim.cli.correlator_table", boom)
    code, _, err = run_cli(capsys, "chsh", "--state", "singlet", "--preset", "optimal")
    assert code == 1
    assert "internal error" in err


def test_reports_validate_against_schema(capsys):
    run_json(capsys, "chsh", "--preset", "aligned")
    run_json(capsys, "optimize", "--state", "werner:0.3")
    run_json(capsys, "werner-sweep", "--points", "3", "--p-min", "0.2", "--p-max", "0.4")
    run_json(capsys, "lhv", "--exhaustive")
    run_json(capsys, "sample", "--preset", "optimal", "--trials", "100")
