import io
import json
import subprocess
import sys

import numpy as np
import pytest

from coordgame.cli import SWEEP_OUTPUTS, fmt, main


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), stdout=out)
    return code, out.getvalue()


def parse_kv(text):
    return dict(line.split("=", 1) for line in text.splitlines())


def read_csv(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    header = lines[0].split(",")
    return header, np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])


@pytest.mark.parametrize("value, expected", [
    (0.1, "0.1"), (1 / 3, "0.333333333333"), (True, "true"), (7, "7"), ("inf", "inf"), (1e-20, "1e-20"),
])
def test_fmt(value, expected):
    assert fmt(value) == expected


def test_solve_diffuse():
    code, out = run("solve", "--n", "10", "--lambda", "1", "--sigma-x-sq", "1e8", "--sigma-z-sq", "1")
    kv = parse_kv(out)
    assert code == 0
    assert abs(float(kv["ne_tau"]) - 0.45) <= 1e-3
    assert kv["methods_agree"] == "true"


def test_solve_oracle_formula():
    code, out = run("solve", "--n", "2", "--lambda", "4", "--sigma-x-sq", "1", "--sigma-z-sq", "1")
    assert code == 0 and float(parse_kv(out)["oracle_tau"]) == 1.0


def test_solve_mean_field_frozen():
    _, out = run("solve", "--n", "inf", "--lambda", "1", "--sigma-x-sq", "1", "--sigma-z-sq", "0.25")
    kv = parse_kv(out)
    assert kv["n_agents"] == "inf"
    assert 0.73313 <= float(kv["ne_tau"]) <= 0.73314


@pytest.mark.parametrize("argv", [
    ["solve", "--lambda", "-1"],
    ["solve", "--n", "1"],
    ["solve", "--sigma-z-sq", "0"],
    ["solve", "--bogus"],
    ["sweep", "--grid", "1,0.5"],
    ["sweep", "--grid", "0,1"],
    ["sweep", "--grid", "1,2", "--outputs", "nope"],
    ["sweep"],
    ["simulate", "--tau", "0", "--policy", "ne"],
    ["simulate", "--samples", "0"],
])
def test_usage_errors_exit_2(argv):
    assert run(*argv)[0] == 2


def test_io_error_exit_3(tmp_path):
    target = tmp_path / "missing" / "out.csv"
    assert run("sweep", "--grid", "1", "--outputs", "ce_tau", "--out", str(target))[0] == 3
    assert run("br-curve", "--tau-grid", "0", "--out", str(target))[0] == 3
    assert run("solve", "--config", str(tmp_path / "none.json"))[0] == 3


def test_sweep_header_and_rows(tmp_path):
    path = tmp_path / "sweep.csv"
    code, _ = run("sweep", "--n", "inf", "--linspace", "0.1", "2", "5", "--out", str(path))
    assert code == 0
    text = path.read_bytes().decode()
    assert text.endswith("\n") and "\r" not in text
    header, rows = read_csv(text)
    assert header == ["sweep_value", *SWEEP_OUTPUTS]
    assert rows.shape == (5, 9)
    assert text.splitlines()[0] == "sweep_value,ne_tau,ce_tau,oracle_tau,utility_ne,utility_ce,rho_ne,rho_ce,fano_bound"


def test_sweep_subset_keeps_order():
    _, out = run("sweep", "--grid", "0.5,1", "--outputs", "fano_bound,ce_tau")
    header, rows = read_csv(out)
    assert header == ["sweep_value", "ce_tau", "fano_bound"]
    assert rows[:, 1] == pytest.approx([0.45 * 1.5, 0.45 * 2], abs=1e-12)


def test_sweep_other_variables():
    _, out = run("sweep", "--variable", "n_agents", "--grid", "2,10,100", "--outputs", "oracle_tau")
    assert read_csv(out)[1][:, 1] == pytest.approx([0.25, 0.45, 0.495])
    assert run("sweep", "--variable", "n_agents", "--grid", "2.5")[0] == 2
    _, out = run("sweep", "--variable", "lambda", "--grid", "1,2", "--outputs", "oracle_tau")
    assert read_csv(out)[1][:, 1] == pytest.approx([0.45, 0.9])


def test_sweep_byte_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sweep", "--n", "inf", "--grid", "0.1,1,3", "--out"]
    run(*args, str(a))
    run(*args, str(b))
    assert a.read_bytes() == b.read_bytes()


def test_br_curve_single_point():
    code, out = run("br-curve", "--tau-grid", "0")
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "tau,br_tau"
    assert len(lines) == 3 and lines[2].startswith("# fixed_point=")


def test_br_curve_fixed_points_and_crossing():
    fixed = []
    for z in ("0.1", "0.5", "1"):
        _, out = run("br-curve", "--n", "10", "--sigma-z-sq", z, "--tau-linspace", "0", "4", "81")
        _, rows = read_csv(out)
        diff = rows[:, 1] - rows[:, 0]
        assert np.count_nonzero(np.diff(np.sign(diff)) != 0) == 1
        fixed.append(float(out.splitlines()[-1].split("=")[1]))
    assert fixed[0] < fixed[1] < fixed[2]


def test_simulate_deterministic_and_zero_utility():
    args = ["simulate", "--samples", "20000", "--seed", "5"]
    assert run(*args) == run(*args)
    kv = parse_kv(run("simulate", "--tau=-1e6", "--samples", "5000")[1])
    assert float(kv["empirical_utility"]) == 0.0
    assert "PCG64" in kv["rng"]


def test_simulate_matches_quadrature():
    _, out = run("simulate", "--samples", "1000000", "--seed", "42")
    kv = parse_kv(out)
    assert float(kv["empirical_rho"]) == 0.772759
    _, out = run("sweep", "--variable", "sigma_z_sq", "--grid", "1", "--outputs", "utility_ne,rho_ne")
    _, rows = read_csv(out)
    assert abs(float(kv["empirical_rho"]) - rows[0, 2]) <= 3 * float(kv["rho_std_error"])
    assert abs(float(kv["empirical_utility"]) - rows[0, 1]) <= 3 * float(kv["utility_std_error"])


def test_simulate_policies_and_profile():
    kv = parse_kv(run("simulate", "--policy", "ce", "--samples", "1000")[1])
    assert float(kv["tau"]) == pytest.approx(0.9)
    kv = parse_kv(run("simulate", "--n", "3", "--thresholds", "0.1,0.2,0.3", "--samples", "1000")[1])
    assert float(kv["tau"]) == pytest.approx(0.2)


def test_bound_output():
    kv = parse_kv(run("bound", "--n", "inf")[1])
    assert float(kv["tau_oracle"]) == 0.5
    assert 0.5 <= float(kv["rho_upper_bound"]) <= 1


def test_config_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_agents": "inf", "lambda": 2.0, "sigma_z_sq": 3.0}))
    kv = parse_kv(run("solve", "--config", str(cfg))[1])
    assert kv["n_agents"] == "inf" and float(kv["oracle_tau"]) == 1.0
    assert float(kv["ce_tau"]) == pytest.approx(4.0)
    kv = parse_kv(run("solve", "--config", str(cfg), "--lambda", "1", "--n", "10")[1])
    assert float(kv["oracle_tau"]) == 0.45 and float(kv["ce_tau"]) == pytest.approx(1.8)


def test_config_rejects_bad_content(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"colour": 1}))
    assert run("solve", "--config", str(cfg))[0] == 2
    cfg.write_text("{not json")
    assert run("solve", "--config", str(cfg))[0] == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "coordgame", "solve", "--n", "2", "--lambda", "4"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and "oracle_tau=1\n" in res.stdout
