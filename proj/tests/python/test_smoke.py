import os
import subprocess

import pytest

import v2xmac

CLI = os.environ.get("V2XMAC_CLI", "v2xmac")


def test_cam_matches_oracle():
    closed = v2xmac.solve_cam(5, 0.5)
    labels, oracle = v2xmac.oracle_steady_state("cam", v2xmac.Scenario.parse("traffic.T_C = 100\n"), p_t=0.5)
    assert abs(closed[0] - 6 / 31) < 1e-12
    assert len(labels) == 200 and labels[0] == "tx,0"
    assert abs(sum(oracle) - 1) < 1e-12


def test_queue_and_theta():
    probs = v2xmac.solve_queue(0.2, 0.3, 0.5, 10)
    assert len(probs) == 11
    assert abs(sum(probs) - 1) < 1e-12
    assert abs(v2xmac.update_theta(0.01, 101) - (1 - 0.99**100)) < 1e-13
    assert v2xmac.adaptive_cam_rate(0.6, 100) == 300


def test_scenario_round_trip_and_errors():
    s = v2xmac.Scenario.parse("N = 75\ncv2x.gamma = 20\nsweep.N = 50:300:50\n")
    assert s.get("cv2x.R_h") == "75"
    assert v2xmac.Scenario.parse(s.serialize()) == s
    assert len(s.expand()) == 6
    assert "cv2x.P_rk" in v2xmac.config_keys()
    with pytest.raises(v2xmac.ModelError, match=r"cv2x\.P_rk"):
        v2xmac.Scenario.parse("cv2x.P_rk = 0.9\n")
    with pytest.raises(v2xmac.ModelError):
        s.set("cv2x.P_rk", "1.5")


def test_evaluate_and_simulate():
    s = v2xmac.Scenario.parse("N = 50\n")
    r = v2xmac.evaluate("cv2x", s)
    assert r["converged"] and r["N"] == 50
    assert 0 <= r["P_col"] <= 1
    d = v2xmac.evaluate("dot11p", s)
    assert d["theta"] > 0
    a = v2xmac.simulate("dot11p", s, seed=3, duration_s=10, replications=2)
    b = v2xmac.simulate("dot11p", s, seed=3, duration_s=10, replications=2, jobs=2)
    assert a == b


def run_cli(*args):
    return subprocess.run([CLI, *args], capture_output=True, text=True)


def test_cli_exit_codes_and_determinism(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("cv2x.P_rk = 0.9\n")
    r = run_cli("solve", "--config", str(bad))
    assert r.returncode == 2
    assert "cv2x.P_rk" in r.stderr

    good = tmp_path / "good.cfg"
    good.write_text("tech = both\nsweep.N = 50:300:50\n")
    first = run_cli("solve", "--config", str(good))
    second = run_cli("solve", "--config", str(good), "--jobs", "3")
    assert first.returncode == 0
    assert first.stdout == second.stdout
    lines = first.stdout.splitlines()
    assert lines[0].startswith("# schema:")
    assert len(lines) == 2 + 12

    sim_args = ("simulate", "--config", str(good), "--duration-s", "10", "--replications", "2")
    assert run_cli(*sim_args).stdout == run_cli(*sim_args).stdout


def test_cli_recipes(tmp_path):
    r = run_cli("recipes", "--out", str(tmp_path))
    assert r.returncode == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert "fig6a_delay_vs_N.cfg" in names and len(names) == 6
    sweep = run_cli("sweep", "--recipe", "fig6b_theta_vs_N")
    assert sweep.returncode == 0
