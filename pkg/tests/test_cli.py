import os

import numpy as np
import pytest

from longwave.cli import main


def test_dispersion_writes_csv(tmp_path):
    out = tmp_path / "out"
    rc = main(["--out-dir", str(out), "dispersion", "--dk-max", "2.0", "--samples", "5"])
    assert rc == 0
    lines = (out / "dispersion.csv").read_text().splitlines()
    assert lines[0] == "Dk,bbm,peregrine,euler"
    assert len(lines) == 6
    row = [float(v) for v in lines[-1].split(",")]
    assert row[0] == pytest.approx(2.0)
    assert row[1] == pytest.approx(0.6)


def test_elliptic_quick(tmp_path):
    out = tmp_path / "out"
    rc = main([
        "--out-dir", str(out), "elliptic", "--degree-u", "1", "--resolutions", "4,8",
    ])
    assert rc == 0
    assert (out / "elliptic_flat_r1.csv").exists()


def test_mms_smoke(tmp_path):
    out = tmp_path / "out"
    rc = main([
        "--out-dir", str(out), "mms", "--model", "bbm", "--degree-eta", "1",
        "--degree-u", "1", "--resolutions", "4,6", "--tmax", "0.05", "--dt", "0.01",
    ])
    assert rc == 0
    assert (out / "mms_bbm_11.csv").exists()


def test_solitary_smoke(tmp_path):
    out = tmp_path / "out"
    rc = main([
        "--out-dir", str(out), "solitary", "--system", "bbm", "--amplitude", "0.2",
        "--channel=-15,15,-1,1", "--nx", "60", "--ny", "4",
        "--degree-u", "1", "--delta", "1e-4",
    ])
    assert rc == 0
    assert (out / "solitary_bbm_A0.2.vtk").exists()


def test_run_toml(tmp_path):
    conf = tmp_path / "c.toml"
    conf.write_text(
        """
[scenario]
name = "mini"
model = "bbm"
gravity = 1.0
degree_u = 1
T = 0.2
dt = 0.1
[mesh]
bounds = [0.0, 2.0, 0.0, 1.0]
nx = 6
ny = 3
[bathymetry]
depth = 1.0
[gauges]
mid = [1.0, 0.5]
"""
    )
    out = tmp_path / "out"
    rc = main(["--out-dir", str(out), "run", str(conf)])
    assert rc == 0
    assert (out / "mini_gauges.csv").exists()
    assert any(p.suffix == ".vtk" for p in out.iterdir())


def test_run_reports_config_errors(tmp_path):
    conf = tmp_path / "c.toml"
    conf.write_text(
        """
[scenario]
T = 0.2
dt = 0.1
[mesh]
bounds = [0.0, 2.0, 0.0, 1.0]
nx = 4
ny = 2
[gauges]
far = [9.0, 9.0]
"""
    )
    rc = main(["--out-dir", str(tmp_path / "o"), "run", str(conf)])
    assert rc == 1
