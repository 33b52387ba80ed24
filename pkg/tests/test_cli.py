import json
import math

import numpy as np
import pytest

from thermalent.cli import dispatch


def run(capsys, *argv):
    code = dispatch(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def result_of(out: str):
    return json.loads(out)["result"]


class TestClassify:
    def test_catalysis_initial_not_entanglable(self, capsys):
        code, out, _ = run(capsys, "classify", "--state", "0.4,0.25,0.33,0.02",
                           "--beta", "0", "--gap", "1")
        assert code == 0
        res = result_of(out)
        assert res["in_TE"] is False and res["in_E"] is False
        assert res["pi_star_point"] == [0.33, 0.4, 0.25, 0.02]

    def test_ground_state_entanglable_at_finite_beta(self, capsys):
        code, out, _ = run(capsys, "classify", "--state", "1,0,0,0", "--beta", "1")
        assert code == 0
        res = result_of(out)
        assert res["in_TE"] is True
        assert res["f_star"] == pytest.approx(-math.exp(-2), abs=1e-11)

    def test_rejects_unnormalized_without_renorm(self, capsys):
        code, _, err = run(capsys, "classify", "--state", "1,1,1,1", "--beta", "0")
        assert code == 2 and "error" in err

    def test_renorm_flag(self, capsys):
        code, out, _ = run(capsys, "classify", "--state", "1,1,1,1", "--beta", "0",
                           "--renorm")
        assert code == 0
        assert result_of(out)["in_TE"] is False  # maximally mixed is the Gibbs state


class TestValidationExits:
    def test_unknown_subcommand(self, capsys):
        code, _, _ = run(capsys, "frobnicate")
        assert code == 2

    def test_unknown_flag(self, capsys):
        code, _, _ = run(capsys, "classify", "--state", "1,0,0,0", "--warp", "9")
        assert code == 2

    def test_bad_state_string(self, capsys):
        code, _, err = run(capsys, "classify", "--state", "a,b,c,d")
        assert code == 2

    def test_missing_required(self, capsys):
        code, _, _ = run(capsys, "classify")
        assert code == 2

    def test_help_exits_zero(self, capsys):
        code, _, _ = run(capsys, "--help")
        assert code == 0


class TestVolume:
    def test_reproducible_result_bytes(self, capsys):
        args = ("volume", "--set", "TNE", "--beta", "0.5", "--samples", "20000",
                "--seed", "5")
        _, out1, _ = run(capsys, *args)
        _, out2, _ = run(capsys, *args)
        r1, r2 = json.loads(out1), json.loads(out2)
        assert r1["result"] == r2["result"]
        assert r1["manifest"]["params"] == r2["manifest"]["params"]

    def test_env_seed_fallback(self, capsys, monkeypatch):
        monkeypatch.setenv("THERMALENT_SEED", "99")
        code, out, _ = run(capsys, "volume", "--set", "E", "--samples", "5000")
        assert code == 0
        assert json.loads(out)["manifest"]["seed"] == 99
        assert result_of(out)["seed"] == 99

    def test_ent_cone_requires_state(self, capsys):
        code, _, err = run(capsys, "volume", "--set", "ENT_CONE", "--samples", "100")
        assert code == 2

    def test_threads_do_not_change_result(self, capsys):
        base = ("volume", "--set", "E", "--samples", "150000", "--seed", "3")
        _, a, _ = run(capsys, *base, "--threads", "1")
        _, b, _ = run(capsys, *base, "--threads", "4")
        assert result_of(a)["fraction"] == result_of(b)["fraction"]


class TestConeAndCurve:
    def test_cone_json_schema(self, capsys):
        code, out, _ = run(capsys, "cone", "--state", "0,0,0,1", "--beta", "0")
        assert code == 0
        res = result_of(out)
        assert res["origin"] == [0, 0, 0, 1]
        assert len(res["extremes"]) == 4
        first = res["extremes"][0]
        assert sorted(first["order"]) == [1, 2, 3, 4]
        assert len(first["probs"]) == 4

    def test_cone_custom_energies(self, capsys):
        code, out, _ = run(capsys, "cone", "--state", "0.7,0.2,0.1",
                           "--energies", "0,1,2", "--beta", "0.5")
        assert code == 0
        # two of the 3! orderings coincide for this state
        extremes = result_of(out)["extremes"]
        assert len(extremes) == 5
        pts = np.array([e["probs"] for e in extremes])
        gaps = np.abs(pts[:, None, :] - pts[None, :, :]).max(axis=-1)
        assert gaps[~np.eye(5, dtype=bool)].min() > 1e-6

    def test_curve_csv_default(self, capsys):
        code, out, _ = run(capsys, "curve", "--state", "0.7,0.2,0.1",
                           "--energies", "0,1,2", "--beta", "0.5")
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0].startswith("# manifest:")
        assert lines[1] == "x,y"
        rows = [tuple(map(float, l.split(","))) for l in lines[2:]]
        assert rows[0] == (0.0, 0.0)
        assert rows[-1][1] == pytest.approx(1.0, abs=1e-9)

    def test_curve_extra_points_json(self, capsys):
        code, out, _ = run(capsys, "curve", "--state", "0.5,0.5,0,0", "--beta", "1",
                           "--points", "10", "--format", "json")
        assert code == 0
        res = result_of(out)
        assert 0.5 in res["x"]
        assert len(res["x"]) >= 11


class TestJc:
    def test_single_point(self, capsys):
        code, out, _ = run(capsys, "jc", "--initial", "11", "--betaE", "10",
                           "--format", "json")
        assert code == 0
        rows = result_of(out)
        assert rows[0]["negativity"] >= 0.45

    def test_sweep_csv(self, capsys):
        code, out, _ = run(capsys, "jc", "--initial", "00", "--betaE-range", "1:3:3")
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[1] == "betaE,optimal_time,ground_pop,negativity"
        assert len(lines) == 5

    def test_low_betae_guard(self, capsys):
        code, _, err = run(capsys, "jc", "--initial", "00", "--betaE", "0.05")
        assert code == 2 and "allow-low-betae" in err

    def test_low_betae_override(self, capsys):
        code, out, _ = run(capsys, "jc", "--initial", "00", "--betaE", "0.15",
                           "--allow-low-betae", "--format", "json")
        assert code == 0


class TestOtherSubcommands:
    def test_mtp(self, capsys):
        code, out, _ = run(capsys, "mtp", "--state", "0,0,0,1", "--beta", "2",
                           "--budget", "2000")
        assert code == 0
        res = result_of(out)
        assert res["best_f"] < 0 and res["entangling"] is True
        assert res["schedule"]

    def test_catalysis_demo(self, capsys):
        code, out, _ = run(capsys, "catalysis-demo")
        assert code == 0
        res = result_of(out)
        assert res["status"] == "PASS"
        assert res["system_final"] == ["949/2000", "613/5000", "771/2500", "189/2000"]

    def test_critical_temp_thermal(self, capsys):
        code, out, _ = run(capsys, "critical-temp", "--beta-s", "5")
        assert code == 0
        res = result_of(out)
        assert res["beta_c1"] == pytest.approx(3.9058746, abs=1e-6)
        assert res["beta_c2"] > res["beta_c1"]

    def test_critical_temp_scan(self, capsys):
        code, out, _ = run(capsys, "critical-temp", "--state", "0.12,0.38,0.12,0.38",
                           "--range", "0:2", "--scan", "300")
        assert code == 0
        roots = result_of(out)["crossings"]
        assert len(roots) == 1 and abs(roots[0] - 0.21) < 0.02

    def test_critical_temp_requires_one_mode(self, capsys):
        code, _, _ = run(capsys, "critical-temp")
        assert code == 2

    def test_boundary_with_mesh(self, capsys, tmp_path):
        mesh = tmp_path / "cloud.obj"
        out_file = tmp_path / "cloud.csv"
        code, _, _ = run(capsys, "boundary", "--beta", "0", "--grid", "6",
                         "--iters", "20", "--mesh-out", str(mesh),
                         "--out", str(out_file))
        assert code == 0
        text = out_file.read_text()
        assert text.split("\n")[1] == "p1,p2,p3,p4"
        assert mesh.read_text().startswith("v ")

    def test_out_file_json(self, capsys, tmp_path):
        target = tmp_path / "report.json"
        code, out, _ = run(capsys, "classify", "--state", "1,0,0,0", "--beta", "1",
                           "--out", str(target))
        assert code == 0 and out == ""
        assert json.loads(target.read_text())["result"]["in_TE"] is True


class TestFormatting:
    def test_floats_at_12_significant_digits(self, capsys):
        _, out, _ = run(capsys, "classify", "--state", "1,0,0,0", "--beta", "1")
        res = result_of(out)
        assert res["f_star"] == float(f"{-math.exp(-2):.12g}")

    def test_version_flag(self, capsys):
        code, out, _ = run(capsys, "--version")
        assert code == 0
