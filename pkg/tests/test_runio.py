import json

import numpy as np
import pytest

from donorgates.densities import DensityCurve
from donorgates.mace import Trajectory
from donorgates.maps import InteractionMap
from donorgates.runio import (
    read_config,
    write_csv,
    write_curve_csv,
    write_map_csv,
    write_sidecar,
    write_trajectory_csv,
)


def test_write_csv_format(tmp_path):
    p = write_csv(tmp_path / "t.csv", ["a", "b"],
                  [[1, 1.0 / 3.0], [np.int64(7), np.float64(2.5)]])
    text = p.read_text()
    lines = text.split("\n")
    assert lines[0] == "a,b"
    assert lines[1] == "1,0.3333333333"
    assert lines[2] == "7,2.5"
    assert text.endswith("\n") and "," in text and ";" not in text
    # windows line endings never appear
    assert "\r" not in text


def test_write_curve_csv(tmp_path):
    curve = DensityCurve("SFG", np.array([1e10, 2e10]),
                         np.array([1.5e9, 2.5e9]), np.array([15.0, 12.5]))
    p = write_curve_csv(tmp_path / "c.csv", curve, dim=2)
    lines = p.read_text().strip().split("\n")
    assert lines[0] == "D_r_per_cm2,active_density,active_percent"
    assert len(lines) == 3
    assert lines[1].split(",") == ["1e+10", "1500000000", "15"]
    p3 = write_curve_csv(tmp_path / "c3.csv", DensityCurve(
        "HeisExGd", np.zeros(0), np.zeros(0), np.zeros(0)), dim=3)
    # empty scans still leave a parseable header-only artifact
    assert p3.read_text() == "D_r_per_cm3,active_density,active_percent\n"


def test_write_map_csv(tmp_path):
    imap = InteractionMap(np.array([-0.5, 0.5]), np.array([-0.5, 0.5]),
                          np.array([[1.0, 2.0], [3.0, 4.0]]), "X")
    p = write_map_csv(tmp_path / "m.csv", imap)
    lines = p.read_text().strip().split("\n")
    assert lines[0] == "x_nm,y_nm,J_ueV"
    assert len(lines) == 5
    assert lines[1] == "-0.5,-0.5,1"
    assert lines[4] == "0.5,0.5,4"


def test_write_trajectory_csv(tmp_path):
    t = np.array([0.0, 1.0])
    g = Trajectory(t, np.array([0.0, 0.1]), np.array([0.0, 0.01]), 5, 3, 0)
    e = Trajectory(t, np.array([0.0, 0.3]), np.array([0.0, 0.02]), 5, 3, 0)
    p = write_trajectory_csv(tmp_path / "traj.csv", g, e)
    lines = p.read_text().strip().split("\n")
    assert lines[0] == "t_ps,P_sf,err,P_sf_excited,err_excited,abs_diff"
    assert lines[2].split(",")[-1] == "0.2"


def test_sidecar_roundtrip(tmp_path):
    cfg = {"seed": np.int64(3), "value": np.float64(1.5),
           "grid": np.array([1.0, 2.0]), "name": "run"}
    p = write_sidecar(tmp_path / "s.json", cfg)
    text = p.read_text()
    assert text.endswith("\n")
    # keys are sorted for byte-stable output
    assert text.index('"grid"') < text.index('"name"') < text.index('"seed"')
    back = read_config(p)
    assert back == {"seed": 3, "value": 1.5, "grid": [1.0, 2.0], "name": "run"}
    # identical content writes identical bytes
    p2 = write_sidecar(tmp_path / "s2.json", cfg)
    assert p2.read_bytes() == p.read_bytes()
    with pytest.raises(TypeError):
        write_sidecar(tmp_path / "bad.json", {"x": object()})


def test_sidecar_json_is_plain(tmp_path):
    p = write_sidecar(tmp_path / "s.json", {"a": 1})
    assert json.loads(p.read_text()) == {"a": 1}
