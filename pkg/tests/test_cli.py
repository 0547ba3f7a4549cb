import json
import subprocess
import sys
import textwrap

import numpy as np
import pytest

from logeit.cli import EXPERIMENTS, load_config, main, run
from logeit.errors import ConfigError
from logeit.harness import ExperimentReport
from logeit.io import emit_plotdata, read_operator_csv, sha256_file, write_operator_csv

BASE = """
[run]
experiment = tau_rate_experiment

[mesh]
level = 4
N = 16

[conductivity]
kind = constant
value = 1.0
"""


def _config(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(textwrap.dedent(text))
    return p


def test_list_experiments(capsys):
    assert main(["--list-experiments"]) == 0
    out = capsys.readouterr().out
    for name in EXPERIMENTS:
        assert name in out
    assert "tau_rate_experiment" in EXPERIMENTS and "all" in EXPERIMENTS


def test_missing_command_exits_2():
    assert main([]) == 2


@pytest.mark.parametrize(
    "extra, message",
    [
        ("[mesh]\nlevel = 2\nN = 12\n", "alias"),
        ("[grids]\ntau =\n", "empty"),
        ("[grids]\ntaus = 0.1\n", "unknown key"),
        ("[plots]\nwidth = 3\n", "unknown section"),
        ("[grids]\neps = zero\n", "parse"),
    ],
)
def test_bad_config_exits_2(tmp_path, capsys, extra, message):
    text = BASE.replace("[mesh]\nlevel = 4\nN = 16\n", "") if extra.startswith("[mesh]") else BASE
    cfg = _config(tmp_path, text + extra)
    assert run(cfg, out=str(tmp_path / "o")) == 2
    assert message in capsys.readouterr().err.lower()
    with pytest.raises(ConfigError):
        load_config(cfg)


def test_unknown_experiment_exits_2(tmp_path):
    cfg = _config(tmp_path, BASE.replace("tau_rate_experiment", "tau_rates_please"))
    assert run(cfg, out=str(tmp_path / "o")) == 2


def test_tau_rate_run_writes_artifacts(tmp_path):
    cfg = _config(tmp_path, BASE + "[grids]\neps = 0.5\n")
    out = tmp_path / "o"
    assert run(cfg, out=str(out)) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["passed"] is True
    paths = {f["path"] for f in manifest["files"]}
    assert {"config.ini", "matrices/nd.csv", "matrices/log_nd.csv"} <= paths
    assert any(p.startswith("reports/") and p.endswith(".json") for p in paths)
    assert any(p.startswith("plots/") for p in paths)
    assert "timings.json" not in paths and (out / "timings.json").exists()
    for f in manifest["files"]:
        assert sha256_file(out / f["path"]) == f["sha256"]
    M, meta = read_operator_csv(out / "matrices" / "nd.csv")
    assert M.shape == (32, 32)
    assert meta["N"] == "16" and meta["signature"] == "-0.5,0.5"


def test_csv_format_and_seed_override(tmp_path):
    cfg = _config(tmp_path, BASE + "[grids]\neps = 0.5\n")
    out = tmp_path / "o"
    assert run(cfg, out=str(out), seed=7, fmt="csv") == 0
    report = next((out / "reports").glob("*.csv")).read_text().splitlines()
    assert report[0] == "name,value,lower,upper,passed"
    assert json.loads((out / "manifest.json").read_text())["seed"] == 7


def test_failing_gate_exits_1(tmp_path):
    # eps = 0.1 needs frequencies far beyond this truncation
    cfg = _config(tmp_path, BASE + "[grids]\neps = 0.1\n")
    assert run(cfg, out=str(tmp_path / "o")) == 1
    assert json.loads((tmp_path / "o" / "manifest.json").read_text())["passed"] is False


def test_tau_below_spectrum_exits_3(tmp_path, capsys):
    cfg = _config(tmp_path, BASE + "[grids]\ntau = 1e-6, 1e-5, 1e-4\n")
    assert run(cfg, out=str(tmp_path / "o")) == 3
    err = capsys.readouterr().err
    assert "PlateauError" in err and "Traceback" not in err


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "logeit", "--list-experiments"], capture_output=True, text=True)
    assert res.returncode == 0 and "neumann_series_check" in res.stdout


def test_operator_csv_roundtrip(tmp_path):
    M = np.random.default_rng(0).standard_normal((6, 6))
    path = write_operator_csv(M, tmp_path / "m" / "op.csv", level=3)
    back, meta = read_operator_csv(path)
    np.testing.assert_array_equal(back, M)
    assert meta == {"level": "3"}


def test_plotdata_two_columns(tmp_path):
    rep = ExperimentReport("demo")
    rep.add_table("t", x=[1.0, 2.0, 4.0], y=[0.5, 0.25, 0.125])
    rep.add_curve("decay", "t", "x", "y")
    (path,) = emit_plotdata(rep, tmp_path)
    assert path.name == "demo__decay.csv"
    rows = path.read_text().splitlines()
    assert rows[0] == "x,y" and len(rows) == 4
    assert all(len(r.split(",")) == 2 for r in rows)
    np.testing.assert_array_equal(np.loadtxt(path, delimiter=",", skiprows=1)[:, 1], [0.5, 0.25, 0.125])
