import hashlib
import os
import subprocess
import sys

import pytest

from fdmimome.experiments import ExperimentSpec, resolve, run, validate


def _sha(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


class TestValidate:
    def test_concentration_ok(self):
        diag = validate(ExperimentSpec("concentration"))
        assert diag["ok"] and diag["cells"] == 3 and diag["trials"] == 100

    def test_blind_needs_long_packet(self):
        diag = validate(ExperimentSpec("blind-rate", params={"k2": [4]}))
        assert not diag["ok"]
        assert any("k2" in p for p in diag["problems"])

    def test_ne_sweep_rejects_odd_antennas(self):
        diag = validate(ExperimentSpec("ne-sweep", params={"n_a": [5]}))
        assert not diag["ok"]

    def test_unknown_experiment(self):
        with pytest.raises(ValueError):
            ExperimentSpec("does-not-exist")

    def test_malformed_grid_values(self):
        for bad in ({"ne": "abc"}, {"ne": ""}, {"ne": []}, {"oops": 3}, {"ne": 8.5}):
            diag = validate(ExperimentSpec("concentration", params=bad))
            assert not diag["ok"], bad
            assert diag["problems"]

    def test_grid_on_scalar_parameter_rejected(self):
        diag = validate(ExperimentSpec("limit-check", params={"p_db": [30.0, 40.0]}))
        assert not diag["ok"]

    def test_anece_short_pilot(self):
        diag = validate(ExperimentSpec("anece-bounds", params={"k1": 2}))
        assert not diag["ok"]

    def test_cell_counts(self):
        params, _ = resolve(ExperimentSpec("sdof"))
        diag = validate(ExperimentSpec("sdof"))
        assert diag["cells"] == len(params["k2"]) * len(params["mode"]) * len(params["n_e"])


class TestRun:
    def test_concentration_row_contract(self, tmp_path):
        out = tmp_path / "conc.csv"
        spec = ExperimentSpec("concentration", params={"ne": [8, 16]}, trials=5, out=str(out))
        run(spec)
        lines = out.read_text().splitlines()
        # header + 2 cells x (5 mc + 1 asymptotic reference)
        assert len(lines) == 1 + 2 * 6
        assert lines[0].startswith("experiment,kind,n_a")
        assert sum("asymptotic" in ln for ln in lines) == 2

    def test_identical_bytes_same_seed(self, tmp_path):
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (out1, out2):
            run(ExperimentSpec("concentration", params={"ne": [8]}, trials=4, seed=3, out=str(out)))
        assert _sha(out1) == _sha(out2)

    def test_worker_count_does_not_change_bytes(self, tmp_path):
        out1, out2 = tmp_path / "w1.csv", tmp_path / "w2.csv"
        spec1 = ExperimentSpec("sdof", out=str(out1))
        spec2 = ExperimentSpec("sdof", out=str(out2))
        run(spec1, workers=1)
        run(spec2, workers=3)
        assert _sha(out1) == _sha(out2)

    def test_sdof_is_closed_form(self, tmp_path):
        out = tmp_path / "sdof.csv"
        run(ExperimentSpec("sdof", out=str(out)))
        header = out.read_text().splitlines()[0].split(",")
        assert "trials" not in header and "se_lower" not in header

    def test_limit_check(self, tmp_path):
        out = tmp_path / "lim.csv"
        run(ExperimentSpec("limit-check", params={"ne": [64, 1024]}, out=str(out)))
        lines = out.read_text().splitlines()
        assert len(lines) == 3
        gap_col = lines[0].split(",").index("rel_gap")
        gaps = [float(ln.split(",")[gap_col]) for ln in lines[1:]]
        assert gaps[0] < 0.02 and gaps[1] < 0.005

    def test_infeasible_spec_raises(self, tmp_path):
        spec = ExperimentSpec("blind-rate", params={"k2": [3]}, out=str(tmp_path / "x.csv"))
        with pytest.raises(ValueError):
            run(spec)


class TestCli:
    def _run(self, *args):
        return subprocess.run(
            [sys.executable, "-m", "fdmimome.cli", *args],
            capture_output=True, text=True,
        )

    def test_list(self):
        res = self._run("list")
        assert res.returncode == 0
        assert "concentration" in res.stdout and "blind-secrecy" in res.stdout

    def test_validate_ok(self):
        res = self._run("validate", "concentration")
        assert res.returncode == 0
        assert "feasible: True" in res.stdout

    def test_validate_infeasible_exits_2(self):
        res = self._run("validate", "blind-rate", "--param", "k2=4")
        assert res.returncode == 2

    def test_bad_param_exits_2(self):
        res = self._run("run", "sdof", "--param", "oops")
        assert res.returncode == 2

    def test_unknown_experiment_exits_2(self):
        res = self._run("run", "not-an-experiment")
        assert res.returncode == 2

    def test_unwritable_output_exits_3(self, tmp_path):
        res = self._run("run", "sdof", "--out", str(tmp_path / "no" / "dir" / "x.csv"))
        assert res.returncode == 3

    def test_run_and_config_file(self, tmp_path):
        cfgfile = tmp_path / "exp.cfg"
        cfgfile.write_text("ne=8,16   # two cells\n")
        out = tmp_path / "c.csv"
        res = self._run("run", "concentration", "--config", str(cfgfile),
                        "--trials", "3", "--out", str(out))
        assert res.returncode == 0, res.stderr
        lines = out.read_text().splitlines()
        assert len(lines) == 1 + 2 * 4

    def test_env_worker_override(self, tmp_path):
        out1, out2 = tmp_path / "e1.csv", tmp_path / "e2.csv"
        env = dict(os.environ, FDMIMOME_WORKERS="2")
        r1 = subprocess.run(
            [sys.executable, "-m", "fdmimome.cli", "run", "concentration",
             "--param", "ne=8", "--trials", "4", "--out", str(out1)],
            capture_output=True, text=True, env=env)
        assert r1.returncode == 0, r1.stderr
        r2 = self._run("run", "concentration", "--param", "ne=8", "--trials", "4",
                       "--out", str(out2))
        assert r2.returncode == 0
        assert _sha(out1) == _sha(out2)
