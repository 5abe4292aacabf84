"""Command-line surface: outputs, exit codes, CSV formats, round-trips."""

import json
import math
import subprocess
import sys

import numpy as np
import pytest

import ringdyn as rd
from ringdyn.cli import main

K0 = 1.531789248105598703


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestPotentialCommand:
    def test_center_default_circle(self, capsys):
        code, out, _ = run(capsys, "--json", "potential", "--point", "0,0,0")
        assert code == 0
        payload = json.loads(out)
        assert payload["V"] == pytest.approx(-1.0, rel=1e-15)
        assert payload["d"] == payload["D"] == 1.0
        assert np.allclose(payload["grad"], 0.0)

    def test_axis_with_unit_mass(self, capsys):
        code, out, _ = run(capsys, "--mass", "1", "--json", "potential", "--point", "0,0,1")
        assert code == 0
        assert json.loads(out)["V"] == pytest.approx(-1 / math.sqrt(2), rel=1e-14)

    def test_lambda_override(self, capsys):
        code, out, _ = run(capsys, "--lam", "1", "--json", "potential", "--point", "0,0,0")
        assert code == 0
        payload = json.loads(out)
        assert payload["mass"] == pytest.approx(2 * math.pi, rel=1e-15)
        assert payload["V"] == pytest.approx(-2 * math.pi, rel=1e-15)

    def test_text_output(self, capsys):
        code, out, _ = run(capsys, "potential", "--point", "2,0,0")
        assert code == 0
        assert "V " in out and "agm(d,D)" in out

    def test_on_circle_point(self, capsys):
        code, _, err = run(capsys, "potential", "--point", "1,0,0")
        assert code == 2
        assert "circle" in err

    def test_lam_and_mass_conflict(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--lam", "1", "--mass", "1", "potential", "--point", "0,0,0"])
        assert exc.value.code == 2


class TestCriticalCommand:
    def test_basic_output(self, capsys):
        code, out, _ = run(capsys, "--json", "critical")
        assert code == 0
        payload = json.loads(out)
        assert 1.0 < payload["r0"] < 2.0
        assert payload["K0"] == pytest.approx(K0, rel=1e-10)
        assert abs(payload["gprime_residual"]) <= 1e-10

    def test_below_K0_reports_no_radii(self, capsys):
        code, out, _ = run(capsys, "critical", "--K", str(0.5 * K0))
        assert code == 0
        assert "no critical radii" in out

    def test_branch_solve_with_residuals(self, capsys):
        code, out, _ = run(capsys, "--json", "critical", "--K", str(1.5 * K0))
        assert code == 0
        payload = json.loads(out)
        assert payload["r1"] == pytest.approx(1.08430077422886599, rel=1e-10)
        assert payload["r2"] == pytest.approx(5.12767036632786522, rel=1e-10)
        K2 = (1.5 * K0) ** 2
        assert max(payload["g_residuals"]) <= 1e-10 * K2


class TestSimulateCommand:
    def test_equilibrium_run(self, capsys, tmp_path):
        out_file = tmp_path / "eq.csv"
        code, out, _ = run(
            capsys,
            "--json",
            "--out",
            str(out_file),
            "simulate",
            "--state",
            "0,0,0,0,0,0",
            "--t-end",
            "2.0",
        )
        assert code == 0
        summary = json.loads(out)
        assert summary["termination"] == "t_end reached"
        assert summary["energy_drift"] <= 1e-12
        assert out_file.exists()

    def test_summary_matches_reread_file(self, capsys, tmp_path):
        out_file = tmp_path / "orbit.csv"
        code, out, _ = run(
            capsys,
            "--json",
            "--out",
            str(out_file),
            "simulate",
            "--state",
            "2.2,0,0.3,0.1,1.1,-0.05",
            "--t-end",
            "5.0",
        )
        assert code == 0
        printed = json.loads(out)
        again = rd.summarize_trajectory(*rd.read_trajectory_csv(out_file))
        again["file"] = str(out_file)
        assert printed == json.loads(json.dumps(again))

    def test_collision_exit_code(self, capsys, tmp_path):
        out_file = tmp_path / "fall.csv"
        code, out, _ = run(
            capsys,
            "--json",
            "--out",
            str(out_file),
            "simulate",
            "--state",
            "0.5,0,0,0.4,0,0",
            "--t-end",
            "20",
        )
        assert code == 1
        summary = json.loads(out)
        assert summary["termination"] == "collision"
        assert summary["collision"]["t_collision"] < 20.0

    def test_default_output_path(self, capsys, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        code, _, _ = run(capsys, "simulate", "--state", "0,0,2,0,0,0", "--t-end", "1")
        assert code == 0
        assert (tmp_path / "trajectory.csv").exists()

    def test_malformed_state(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["simulate", "--state", "1,2,3"])
        assert exc.value.code == 2

    def test_nonpositive_tolerance(self, capsys, tmp_path):
        code, _, err = run(
            capsys,
            "--out",
            str(tmp_path / "x.csv"),
            "simulate",
            "--state",
            "0,0,2,0,0,0",
            "--rtol",
            "0",
        )
        assert code == 2
        assert "positive" in err

    def test_step_budget_failure_keeps_partial(self, capsys, tmp_path):
        out_file = tmp_path / "part.csv"
        code, out, _ = run(
            capsys,
            "--json",
            "--out",
            str(out_file),
            "simulate",
            "--state",
            "2.2,0,0.3,0.1,1.1,-0.05",
            "--t-end",
            "10000",
            "--max-steps",
            "50",
        )
        assert code == 3
        assert json.loads(out)["termination"] == "max-steps"
        assert out_file.exists()


class TestPortraitCommand:
    def test_grid_row_count(self, capsys, tmp_path):
        out_file = tmp_path / "grid.csv"
        code, _, _ = run(
            capsys,
            "--out",
            str(out_file),
            "portrait",
            "--side",
            "outside",
            "--K",
            "2.0",
            "--r",
            "1.1:6:10",
            "--rdot=-1:1:10",
        )
        assert code == 0
        lines = out_file.read_text().strip().splitlines()
        assert lines[0] == "r,rdot,E"
        assert len(lines) == 101

    def test_row_major_order_and_values(self, capsys, tmp_path):
        out_file = tmp_path / "grid.csv"
        run(
            capsys,
            "--out",
            str(out_file),
            "portrait",
            "--side",
            "outside",
            "--K",
            "2.0",
            "--r",
            "1.2:4:3",
            "--rdot",
            "0:1:2",
        )
        rows = np.loadtxt(out_file, delimiter=",", skiprows=1)
        rs = np.linspace(1.2, 4, 3)
        assert np.array_equal(rows[:, 0], np.repeat(rs, 2))
        for r, rdot, E in rows:
            U = rd.effective_potential(r, rd.EffectiveParams(2.0, rd.Circle()), "outside")
            assert E == pytest.approx(U + 0.5 * rdot ** 2, rel=1e-12)

    def test_inside_radial_grid_symmetric(self, capsys, tmp_path):
        out_file = tmp_path / "grid.csv"
        run(
            capsys,
            "--out",
            str(out_file),
            "portrait",
            "--side",
            "inside",
            "--K",
            "0",
            "--r=-0.9:0.9:9",
            "--rdot=-1:1:5",
        )
        rows = np.loadtxt(out_file, delimiter=",", skiprows=1)
        E = rows[:, 2].reshape(9, 5)
        # the linspace grid is only symmetric to rounding, hence the atol
        assert np.allclose(E, E[::-1, :], rtol=0.0, atol=5e-14)
        assert np.allclose(E, E[:, ::-1], rtol=0.0, atol=5e-14)

    def test_saddle_near_inner_circular_orbit(self, capsys, tmp_path):
        data = rd.critical_data(rd.Circle())
        K = 1.5 * data.K0
        r1, _ = rd.critical_radii(K, data)
        out_file = tmp_path / "grid.csv"
        run(
            capsys,
            "--out",
            str(out_file),
            "portrait",
            "--side",
            "outside",
            "--K",
            str(K),
            "--r",
            f"{r1 - 0.02}:{r1 + 0.02}:3",
            "--rdot=-0.1:0.1:3",
        )
        E = np.loadtxt(out_file, delimiter=",", skiprows=1)[:, 2].reshape(3, 3)
        # saddle at the center: max along r, min along rdot
        assert E[1, 1] > E[0, 1] and E[1, 1] > E[2, 1]
        assert E[1, 1] < E[1, 0] and E[1, 1] < E[1, 2]

    def test_out_of_domain_grid(self, capsys):
        code, _, err = run(
            capsys,
            "portrait",
            "--side",
            "outside",
            "--K",
            "2.0",
            "--r",
            "0.5:6:10",
            "--rdot",
            "0:1:2",
        )
        assert code == 2
        assert "domain" in err


class TestWireCommand:
    def test_convergence_table(self, capsys, tmp_path):
        out_file = tmp_path / "wire.csv"
        code, _, _ = run(
            capsys,
            "--out",
            str(out_file),
            "wire",
            "--points",
            "1,0;0,1",
            "--eps",
            "1e-2,1e-3,1e-4",
        )
        assert code == 0
        rows = np.loadtxt(out_file, delimiter=",", skiprows=1)
        assert rows.shape == (6, 4)
        dev = rows[:, 3].reshape(2, 3)
        assert np.all(np.diff(dev, axis=1) < 0)

    def test_origin_rejected(self, capsys):
        code, _, err = run(capsys, "wire", "--points", "0,0", "--eps", "1e-3")
        assert code == 2
        assert err.startswith("error:")


def test_console_script_smoke():
    proc = subprocess.run(
        [sys.executable, "-m", "ringdyn.cli", "--json", "potential", "--point", "0,0,2"],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["V"] == pytest.approx(-1 / math.sqrt(5), rel=1e-14)
