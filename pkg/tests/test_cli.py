import json
import os
import shutil
import subprocess

import pytest

from qising import cli


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_spectrum_band_count(capsys):
    code, out, _ = run(["spectrum", "--gen", "8"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["band_count"] == 34
    assert doc["params"]["gen"] == 8
    assert doc["grid_step"] > 0


def test_spectrum_b_infty(capsys):
    code, out, _ = run(["spectrum", "--method", "b-infty", "--grid", "1000", "--orbit-cap", "8"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["band_count"] == len(doc["bands"]) > 0


def test_unknown_subcommand_is_usage_error(capsys):
    code, _, err = run(["frobnicate"], capsys)
    assert code == 2


def test_missing_subcommand_is_usage_error(capsys):
    assert run([], capsys)[0] == 2


def test_bad_value_names_the_flag(capsys):
    code, _, err = run(["spectrum", "--gen", "1"], capsys)
    assert code == 2
    assert "--gen" in err
    code, _, err = run(["lee-yang", "--grid", "50"], capsys)
    assert code == 2 and "--grid" in err


def test_unparseable_flag_is_usage_error(capsys):
    code, _, err = run(["orbit", "--x", "abc"], capsys)
    assert code == 2 and "--x" in err


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\ngen = 6\npb = 1.4\n")
    _, out, _ = run(["spectrum", "--config", str(cfg)], capsys)
    doc = json.loads(out)
    assert doc["params"]["gen"] == 6 and doc["params"]["pb"] == 1.4
    _, out, _ = run(["spectrum", "--config", str(cfg), "--gen", "7"], capsys)
    doc = json.loads(out)
    assert doc["params"]["gen"] == 7 and doc["params"]["pb"] == 1.4
    assert doc["band_count"] == 21


def test_config_errors(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("nonsense_key = 3\n")
    code, _, err = run(["spectrum", "--config", str(cfg)], capsys)
    assert code == 2 and "nonsense_key" in err
    assert run(["spectrum", "--config", str(tmp_path / "missing.cfg")], capsys)[0] == 2


def test_parallelism_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("QISING_PARALLELISM", "3")
    _, out, _ = run(["orbit"], capsys)
    assert json.loads(out)["params"]["parallelism"] == 3
    _, out, _ = run(["orbit", "--parallelism", "1"], capsys)
    assert json.loads(out)["params"]["parallelism"] == 1
    monkeypatch.setenv("QISING_PARALLELISM", "many")
    assert run(["orbit"], capsys)[0] == 2


def test_output_is_deterministic(capsys):
    args = ["lee-yang", "--gen", "7", "--grid", "20000"]
    first = run(args, capsys)[1]
    second = run(args, capsys)[1]
    assert first == second


def test_free_energy_csv_and_parallel_agreement(tmp_path, capsys):
    base = ["free-energy", "--tau-min", "0.5", "--tau-max", "2", "--tau-steps", "3"]
    serial = run(base + ["--parallelism", "1"], capsys)[1]
    parallel = run(base + ["--parallelism", "2"], capsys)[1]
    lines = serial.splitlines()
    assert lines[0].startswith("# params: ")
    assert lines[1] == "tau,F,n_used,cauchy_gap"
    assert len(lines) == 5
    # identical apart from the recorded parallelism
    assert serial.splitlines()[1:] == parallel.splitlines()[1:]


def test_free_energy_json(capsys):
    code, out, _ = run(["free-energy", "--format", "json", "--tau-steps", "2"], capsys)
    rows = json.loads(out)["rows"]
    assert code == 0 and len(rows) == 2
    assert all(r["cauchy_gap"] <= 1e-10 for r in rows)


def test_csv_only_for_free_energy(capsys):
    assert run(["orbit", "--format", "csv"], capsys)[0] == 2


def test_out_file_is_written_atomically(tmp_path, capsys):
    target = tmp_path / "orbit.json"
    code, out, _ = run(["orbit", "--out", str(target)], capsys)
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["status"] == "escaped"
    assert sorted(os.listdir(tmp_path)) == ["orbit.json"]


def test_orbit_reports_period_six_point_bounded(capsys):
    code, out, _ = run(["orbit", "--x", "0", "--y", "0", "--z", "1.3", "--n-max", "300"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["status"] == "bounded" and doc["escape_index"] is None


def test_dims_reads_spectrum_output(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    run(["spectrum", "--gen", "12", "--pb", "2", "--out", str(spec)], capsys)
    code, out, _ = run(["dims", "--in", str(spec)], capsys)
    doc = json.loads(out)
    assert code == 0
    assert 0.3 < doc["dimension"]["slope"] < 1.0
    assert doc["lower_bound"] <= doc["dimension"]["slope"] + 0.05
    assert len(doc["profile"]) >= 3


def test_dims_requires_input(capsys):
    code, _, err = run(["dims"], capsys)
    assert code == 2 and "--in" in err


def test_lee_yang_with_oracle(capsys):
    code, out, _ = run(["lee-yang", "--gen", "5", "--pb", "2.3", "--pa", "1.7", "--oracle"], capsys)
    doc = json.loads(out)
    assert code == 0
    assert doc["oracle_hdist"] < 1e-8
    assert len(doc["zeros_eta_tilde"]) == len(doc["angles"])


def test_lee_yang_oracle_size_limit(capsys):
    code, _, err = run(["lee-yang", "--gen", "9", "--oracle"], capsys)
    assert code == 2 and "--oracle" in err


def test_validate_subset(capsys):
    code, out, err = run(["validate", "--checks", "1,5"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["all_passed"]
    assert [c["number"] for c in doc["checks"]] == [1, 5]
    assert "[PASS]  1." in err


def test_validate_classical(capsys):
    code, out, _ = run(["validate-classical"], capsys)
    assert code == 0
    assert [c["number"] for c in json.loads(out)["checks"]] == [1, 2]


def test_validate_rejects_unknown_check(capsys):
    assert run(["validate", "--checks", "99"], capsys)[0] == 2


@pytest.mark.skipif(shutil.which("qising") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["qising", "orbit"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["status"] == "escaped"
