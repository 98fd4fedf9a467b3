import json

import pytest

from ghartree.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_params(capsys):
    code, out, _ = run(capsys, "params", "N=3", "p=5", "b=1")
    assert code == 0
    js = json.loads(out)
    assert js["s_c"] == 1.0 and js["class"] == "energy-critical"


def test_unknown_key(capsys):
    code, out, err = run(capsys, "params", "N=3", "p=5", "b=1", "colour=red")
    assert code == 2
    assert json.loads(err)["error"] == "ConfigError"


def test_invalid_params(capsys):
    code, _, err = run(capsys, "params", "N=3", "p=1", "b=1")
    assert code == 2 and "p >= 2" in json.loads(err)["message"]


def test_bad_flag(capsys):
    code, _, err = run(capsys, "params", "N=3", "p=3", "b=1", "--bogus")
    assert code == 2 and json.loads(err)["error"] == "usage"


def test_numerical_failure_exit_code(capsys):
    code, _, err = run(capsys, "groundstate", "N=3", "p=3", "b=1", "n=16", "L=8", "max_iter=2", "tol=1e-14")
    assert code == 3 and json.loads(err)["error"] == "NoConvergence"


def test_thresholds_energy_critical(capsys, tmp_path):
    code, out, _ = run(capsys, "thresholds", "N=3", "p=5", "b=1", "--out", str(tmp_path))
    assert code == 0
    t = json.loads(out)["thresholds"]
    assert t["negative-energy"] == pytest.approx(1.42161, abs=1e-5)
    assert t["energy-critical-lower"] == pytest.approx(0.812225, abs=1e-6)
    lines = (tmp_path / "thresholds.csv").read_text().splitlines()
    assert lines[0].startswith("# ghartree") and lines[1].startswith("# config_hash")


def test_thresholds_subcritical_table(capsys):
    code, out, _ = run(capsys, "thresholds", "N=3", "p=3", "b=1", "gs_n=48", "gs_L=10")
    t = json.loads(out)["thresholds"]
    assert code == 0
    assert t["negative-energy"] == pytest.approx(1.29, abs=1e-2)
    assert t["criterion-blowup"] == pytest.approx(1.08689, abs=1e-4)
    assert t["me-lower"] == pytest.approx(0.9586, abs=2e-3)
    assert t["me-upper"] == pytest.approx(1.1812, abs=2e-3)
    assert t["gradient"] == pytest.approx(1.0418, abs=2e-3)


def test_classify_global(capsys, tmp_path):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text("# subcritical\nN=3\np=3\nb=1\ngs_n=48\ngs_L=10\n")
    code, out, _ = run(capsys, "classify", "beta=0.5", "gamma=1", "--config", str(cfgfile))
    assert code == 0
    assert json.loads(out)["verdict"] == "global-scattering-regime"


def test_deterministic_outputs(capsys, tmp_path):
    args = ["evolve", "N=3", "p=3", "b=1", "beta=0.6", "n=16", "L=6", "dt0=0.01", "t_end=0.04", "record_stride=1"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(capsys, *args, "--out", str(a))[0] == 0
    assert run(capsys, *args, "--out", str(b))[0] == 0
    for name in ("trajectory.csv", "evolve.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert (a / "state.ghfd").read_bytes() == (b / "state.ghfd").read_bytes()


def test_resume(capsys, tmp_path):
    base = ["evolve", "N=3", "p=3", "b=1", "beta=0.6", "n=16", "L=6", "dt0=0.01", "record_stride=1"]
    assert run(capsys, *base, "t_end=0.02", "--out", str(tmp_path / "a"))[0] == 0
    code, out, _ = run(capsys, *base, "t_end=0.04", "--resume", str(tmp_path / "a" / "state.ghfd"), "--out", str(tmp_path / "b"))
    assert code == 0
    assert json.loads(out)["t_final"] == pytest.approx(0.04)


def test_sweep_analytic(capsys, tmp_path):
    code, out, _ = run(
        capsys, "sweep", "N=3", "p=7", "b=1", "beta_min=1.0", "beta_max=1.5", "beta_count=6", "--out", str(tmp_path)
    )
    assert code == 0
    js = json.loads(out)
    verdicts = [r[-1] for r in js["rows"]]
    assert verdicts[0] == "undetermined" and verdicts[-1] == "negative-energy-blowup"
    assert (tmp_path / "sweep.csv").exists()
