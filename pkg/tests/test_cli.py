import json
import subprocess
import sys

import numpy as np
import pytest

from quasiotto.cli import main
from quasiotto.dynmap import coefficient_arrays
from quasiotto.model import DEFAULT_POLICY, ModelParams

MODEL = ["--qubit-freq", "1", "--mode-freq", "1", "--coupling", "0.1", "--inv-temp", "1"]


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def data_rows(text):
    return [line for line in text.splitlines() if not line.startswith("#")]


def test_coeffs_format(capsys):
    code, out, _ = run(["coeffs", *MODEL, "--t-max", "5", "--t-points", "6"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# n_modes=1 ")
    assert "n_max=27" in out and "version=" in out
    rows = data_rows(out)
    assert rows[0] == "t,A,B,Re_C,Im_C,choi_margin"
    assert len(rows) == 7


def test_csv_round_trips_doubles(capsys):
    _, out, _ = run(["coeffs", *MODEL, "--t-max", "3", "--t-points", "4"], capsys)
    table = np.array([[float(v) for v in row.split(",")] for row in data_rows(out)[1:]])
    a, b, c = coefficient_arrays(ModelParams(1, 1.0, 1.0, 0.1, 1.0), DEFAULT_POLICY, table[:, 0])
    assert np.array_equal(table[:, 1], a) and np.array_equal(table[:, 3], c.real)


def test_output_is_byte_deterministic(tmp_path, capsys):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for path in paths:
        assert main(["rates", *MODEL, "--t-max", "4", "--t-points", "9", "-o", str(path)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert data_rows(paths[0].read_text())[0] == "t,U,Gamma_dep,Gamma_d,Gamma_a,invertibility_margin"


def test_flag_overrides_file(tmp_path, capsys):
    cfg = tmp_path / "run.yaml"
    cfg.write_text("n_modes: 1\nqubit_freq: 1\nmode_freq: 1\ncoupling: 0.1\ninv_temp: 1\n")
    _, out, _ = run(["coeffs", "--config", str(cfg), "--coupling", "0.2", "--t-points", "2"], capsys)
    assert "coupling=0.2 " in out.splitlines()[0]


def test_environment_config_path(tmp_path, monkeypatch, capsys):
    cfg = tmp_path / "env.json"
    cfg.write_text(json.dumps({"qubit_freq": 1, "mode_freq": 1, "coupling": 0.3, "inv_temp": 2}))
    monkeypatch.setenv("QUASIOTTO_CONFIG", str(cfg))
    code, out, _ = run(["equilibrium"], capsys)
    assert code == 0
    assert data_rows(out)[0] == "Delta,N,A_bar,chi,R,D"
    assert data_rows(out)[1].startswith("0.29999999999999999,1,")


def test_missing_key_named(capsys):
    code, _, err = run(["coeffs", "--qubit-freq", "1", "--coupling", "0.1", "--inv-temp", "1"], capsys)
    assert code != 0
    assert "mode_freq" in err and len(err.strip().splitlines()) == 1


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("qubit_freq: 1\nmode_freq: 1\ncoupling: 0.1\ninv_temp: 1\nomega: 3\n")
    code, _, err = run(["coeffs", "--config", str(cfg)], capsys)
    assert code != 0 and "unknown key" in err and "omega" in err


def test_type_mismatch(tmp_path, capsys):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("qubit_freq: fast\nmode_freq: 1\ncoupling: 0.1\ninv_temp: 1\n")
    code, _, err = run(["coeffs", "--config", str(cfg)], capsys)
    assert code != 0 and "type mismatch" in err


def test_constraint_violation_reported(capsys):
    code, _, err = run(["coeffs", "--qubit-freq", "1", "--mode-freq", "1", "--coupling", "1.5", "--inv-temp", "1"], capsys)
    assert code != 0 and "coupling exceeds mode frequency" in err


def test_empty_sweep_grid(capsys):
    code, _, err = run(["sweep", "--delta-min", "0.5", "--delta-max", "0.2", "--delta-points", "5"], capsys)
    assert code != 0 and "empty grid" in err
    code, _, err = run(["sweep", "--delta-min", "0.1", "--delta-max", "0.2", "--delta-points", "0"], capsys)
    assert code != 0 and "empty grid" in err


def test_engine_json(capsys):
    code, out, _ = run(["engine", "--coupling", "0.5", "--runs", "3"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert len(doc["eff_cumulative"]) == 3
    assert doc["eff_otto"] == 0.5 and doc["eff_carnot"] == 0.75
    assert set(doc["flags"]) >= {"physical_engine", "beats_otto", "carnot_converged_case"}


def test_engine_sweep_csv(capsys):
    code, out, _ = run(["engine", "--format", "csv", "--delta-min", "0.2", "--delta-max", "0.8", "--delta-points", "4"], capsys)
    assert code == 0 and len(data_rows(out)) == 5


def test_oracle_check_exit_codes(capsys):
    ok = ["oracle-check", *MODEL, "--t-max", "10", "--t-points", "21"]
    assert run(ok, capsys)[0] == 0
    code, out, _ = run(["oracle-check", *MODEL, "--n-modes", "2", "--t-points", "21"], capsys)
    assert code == 1 and "FAIL" in out


def test_evolve_methods_agree(capsys):
    base = ["evolve", *MODEL, "--t-max", "4", "--t-points", "5", "--state", "plus"]
    _, by_map, _ = run(base, capsys)
    _, by_me, _ = run(base + ["--method", "master"], capsys)
    a = np.array([[float(v) for v in r.split(",")] for r in data_rows(by_map)[1:]])
    b = np.array([[float(v) for v in r.split(",")] for r in data_rows(by_me)[1:]])
    assert np.allclose(a, b, atol=1e-8)


def test_parallel_sweep_is_deterministic(capsys):
    args = ["sweep", "--delta-min", "0.3", "--delta-max", "0.9", "--delta-points", "4", "--x1-values", "0.85,0.9"]
    _, serial, _ = run(args + ["--workers", "1"], capsys)
    _, parallel, _ = run(args + ["--workers", "2"], capsys)
    assert serial == parallel and len(data_rows(serial)) == 9


def test_equilibrium_sweep_target(capsys):
    args = ["sweep", "--target", "equilibrium", "--delta-min", "0.1", "--delta-max", "0.9",
            "--delta-points", "3", "--n-modes-values", "1,2,3", "--workers", "1"]
    code, out, _ = run(args, capsys)
    assert code == 0 and len(data_rows(out)) == 10


def test_singular_rates_fail_cleanly(capsys):
    code, _, err = run(["rates", "--n-modes", "3", "--qubit-freq", "1", "--mode-freq", "1",
                        "--coupling", "0.9", "--inv-temp", "0.2"], capsys)
    assert code == 2 and "not invertible" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "quasiotto", "engine", "--coupling", "0.4"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["eff_cumulative"]
