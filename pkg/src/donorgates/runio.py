"""CSV/JSON export with fixed schemas and reproducibility sidecars.

Every artifact gets a JSON sidecar holding the fully resolved run
configuration including the seed, so a run can be reproduced
byte-for-byte from its outputs.
"""

import csv
import json
from pathlib import Path

import numpy as np


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".10g")


def write_csv(path, header: list[str], rows) -> Path:
    """Plain CSV, '.' decimal separator, '\\n' line endings."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def write_map_csv(path, imap) -> Path:
    rows = ((x, y, imap.J_ueV[i, j])
            for i, x in enumerate(imap.x_nm)
            for j, y in enumerate(imap.y_nm))
    return write_csv(path, ["x_nm", "y_nm", "J_ueV"], rows)


def write_curve_csv(path, curve, dim: int = 2) -> Path:
    unit = "cm2" if dim == 2 else "cm3"
    rows = zip(curve.input_density, curve.active_density, curve.active_percent)
    return write_csv(path, [f"D_r_per_{unit}", "active_density", "active_percent"],
                     rows)


def write_trajectory_csv(path, traj_ground, traj_excited) -> Path:
    rows = zip(traj_ground.t_ps, traj_ground.p_sf, traj_ground.err,
               traj_excited.p_sf, traj_excited.err,
               np.abs(traj_excited.p_sf - traj_ground.p_sf))
    return write_csv(path, ["t_ps", "P_sf", "err", "P_sf_excited",
                            "err_excited", "abs_diff"], rows)


def write_sidecar(path, config: dict) -> Path:
    """Resolved-config JSON next to an artifact."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(config, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")
    return path


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not JSON-serializable: {type(x)}")


def read_config(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
