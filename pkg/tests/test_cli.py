"""Command-line interface: outputs, exit codes, seeds, overrides."""

import contextlib
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from powergame.cli import main

EQUAL_BOUNDS = {
    "model": {"family": "exp", "c": 0.5},
    "network": {"k": 2, "n": 1, "sigma2": 1.0, "rates": 1.0, "p_max": 10.0,
                "eta_min": 1.0, "eta_max": 1.0},
    "gains2": [1.0, 1.0],
}


def _run(argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(argv)
    out = {}
    for line in buf.getvalue().splitlines():
        key, _, value = line.partition("=")
        out[key] = value
    return code, out


def _scenario(tmp_path, doc=None, **patch):
    doc = dict(EQUAL_BOUNDS if doc is None else doc)
    doc.update(patch)
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(doc))
    return str(path)


def test_solve_exponential_closed_forms():
    code, out = _run(["solve", "--model", "exp", "--c", "0.5"])
    assert code == 0
    np.testing.assert_allclose(float(out["beta_star"]), 0.5, rtol=1e-12)
    np.testing.assert_allclose(float(out["gamma_tilde"]), 1.0 / 3.0, rtol=1e-12)
    np.testing.assert_allclose(
        float(out["delta"]),
        float(out["phi_gamma_tilde"]) - float(out["phi_beta_star"]), rtol=1e-12)


def test_solve_single_player_folds_to_beta_star():
    code, out = _run(["solve", "--model", "pkt", "--m", "2", "--k", "1"])
    assert code == 0
    assert out["gamma_tilde"] == out["beta_star"]
    np.testing.assert_allclose(float(out["beta_star"]), 1.2564312086261697,
                               rtol=1e-9)


def test_usage_error_exits_2():
    with pytest.raises(SystemExit) as err:
        _run(["solve"])  # --model is required
    assert err.value.code == 2


def test_missing_model_parameter_exits_1():
    code, _ = _run(["solve", "--model", "pkt"])
    assert code == 1


def test_bounds_on_the_equal_bounds_scenario(tmp_path):
    code, out = _run(["bounds", "--scenario", _scenario(tmp_path)])
    assert code == 0
    assert out["t0"] == "1"
    np.testing.assert_allclose(float(out["lambda_max"]),
                               2.0 * math.exp(-0.5) - 1.0, rtol=1e-12)
    np.testing.assert_allclose(float(out["delta"]),
                               2.0 * math.exp(-1.5) - math.exp(-1.0),
                               rtol=1e-12)


def test_equilibria_closed_forms(tmp_path):
    code, out = _run(["equilibria", "--scenario", _scenario(tmp_path)])
    assert code == 0
    np.testing.assert_allclose(float(out["ne_power_1"]), 1.0, rtol=1e-12)
    np.testing.assert_allclose(float(out["ne_utility_2"]), math.exp(-1.0),
                               rtol=1e-12)
    np.testing.assert_allclose(float(out["op_power_1"]), 0.5, rtol=1e-12)
    np.testing.assert_allclose(float(out["op_utility_1"]),
                               2.0 * math.exp(-1.5), rtol=1e-12)
    np.testing.assert_allclose(float(out["se_power_1"]), 0.75, rtol=1e-12)
    np.testing.assert_allclose(float(out["se_power_2"]), 0.875, rtol=1e-12)
    np.testing.assert_allclose(float(out["se_utility_1"]),
                               math.exp(-1.25) / 0.75, rtol=1e-12)
    np.testing.assert_allclose(float(out["se_utility_2"]),
                               math.exp(-1.0) / 0.875, rtol=1e-12)
    assert out["se_leader"] == "1"


def test_equilibria_leader_flag_swaps_roles(tmp_path):
    code, out = _run(["equilibria", "--scenario", _scenario(tmp_path),
                      "--leader", "2"])
    assert code == 0
    np.testing.assert_allclose(float(out["se_power_1"]), 0.875, rtol=1e-12)
    np.testing.assert_allclose(float(out["se_power_2"]), 0.75, rtol=1e-12)
    assert out["se_leader"] == "2"


def test_saturated_regime_exits_3(tmp_path):
    code, _ = _run(["equilibria", "--scenario", _scenario(tmp_path),
                    "--set", "network.p_max=0.1"])
    assert code == 3


def test_no_equilibrium_exits_4():
    code, _ = _run(["solve", "--model", "pkt", "--m", "1"])
    assert code == 4


def test_no_finite_horizon_exits_5(tmp_path):
    code, _ = _run(["bounds", "--scenario", _scenario(tmp_path),
                    "--set", "network.p_max=0.1"])
    assert code == 5


def test_vanishing_channel_mass_exits_6(tmp_path):
    doc = {k: v for k, v in EQUAL_BOUNDS.items() if k != "gains2"}
    doc["network"] = dict(doc["network"], eta_min=30.0, eta_max=60.0)
    doc["channel"] = {"mode": "constant", "mean_gain2": 1.0}
    code, _ = _run(["equilibria", "--scenario", _scenario(tmp_path, doc=doc)])
    assert code == 6


def test_unknown_experiment_option_exits_1(tmp_path):
    code, _ = _run(["experiment", "fig2", "--out", str(tmp_path / "x.csv"),
                    "--set", "nonsense=1"])
    assert code == 1


def _seed_line(path):
    with open(path) as fh:
        return fh.read().splitlines()[2]


def test_seed_precedence(tmp_path, monkeypatch):
    argv = ["experiment", "fig4", "--replicas", "20",
            "--set", "n=16", "--set", "m_values=[10]",
            "--set", 'k_grids={"10": [2]}']
    monkeypatch.setenv("POWERGAME_SEED", "7")
    out = str(tmp_path / "a.csv")
    code, _ = _run(argv + ["--out", out, "--seed", "9"])
    assert code == 0 and _seed_line(out) == "# seed: 9"
    out = str(tmp_path / "b.csv")
    code, _ = _run(argv + ["--out", out])
    assert code == 0 and _seed_line(out) == "# seed: 7"
    monkeypatch.delenv("POWERGAME_SEED")
    out = str(tmp_path / "c.csv")
    code, _ = _run(argv + ["--out", out])
    assert code == 0 and _seed_line(out) == "# seed: 1729"


def test_simulate_frg_deviation_trace(tmp_path):
    out = str(tmp_path / "trace.csv")
    code, res = _run(["simulate", "--scenario", _scenario(tmp_path),
                      "--plan", "frg", "--t", "8", "--t0", "2",
                      "--deviate", "player=1,stage=3,power=max",
                      "--out", out])
    assert code == 0
    assert res["stages"] == "8"
    assert res["deviation_detected_at"] == "3"
    assert "avg_utility_1" in res and "avg_utility_2" in res
    with open(out) as fh:
        lines = fh.read().splitlines()
    assert lines[0].startswith("t,player,gain2,")
    assert len(lines) == 1 + 8 * 2


def test_simulate_drg_reports_tail_bounds(tmp_path):
    code, res = _run(["simulate", "--scenario", _scenario(tmp_path),
                      "--plan", "drg", "--lam", "0.3", "--stages", "40",
                      "--out", str(tmp_path / "trace.csv")])
    assert code == 0
    assert res["stages"] == "40"
    assert res["deviation_detected_at"] == "none"
    assert float(res["avg_utility_tail_bound_1"]) > 0.0


def test_override_scales_equilibrium_power(tmp_path):
    path = _scenario(tmp_path)
    _, base = _run(["equilibria", "--scenario", path])
    _, noisy = _run(["equilibria", "--scenario", path,
                     "--set", "network.sigma2=2.0"])
    np.testing.assert_allclose(float(noisy["ne_power_1"]),
                               2.0 * float(base["ne_power_1"]), rtol=1e-12)


def test_inconsistent_override_exits_1(tmp_path):
    code, _ = _run(["equilibria", "--scenario", _scenario(tmp_path),
                    "--set", "network.k=3"])
    assert code == 1  # three players but only two listed gains


def test_best_response_deviation_runs(tmp_path):
    code, res = _run(["simulate", "--scenario", _scenario(tmp_path),
                      "--plan", "frg", "--t", "6", "--t0", "2",
                      "--deviate",
                      "player=2,stage=3,power=best_response,"
                      "best_response_after=true",
                      "--out", str(tmp_path / "trace.csv")])
    assert code == 0
    assert res["deviation_detected_at"] == "3"


def test_module_entrypoint_smoke():
    proc = subprocess.run(
        [sys.executable, "-m", "powergame.cli", "solve", "--model", "exp",
         "--c", "0.5"], capture_output=True, text=True)
    assert proc.returncode == 0
    fields = dict(line.split("=") for line in proc.stdout.splitlines())
    np.testing.assert_allclose(float(fields["beta_star"]), 0.5, rtol=1e-12)
