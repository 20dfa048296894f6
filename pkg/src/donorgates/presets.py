"""Named gate-geometry presets.

The radii pin the reference viability values so the statistics pipeline
runs without regenerating the (slow) exchange maps; the map module can
recompute them for validation.
"""

from .geometry import GateGeometry

# reference viability radii, nm
R_RR = 11.0          # readout-readout isolation
R_MIN = 11.4         # inner edge of the viability shell
R_MAX = 17.9         # outer edge of the viability shell
R_CC = 42.2          # control-control isolation
R_PAIR_MIN = 11.8    # minimum excited-excited pair separation

BILAYER_R_MAX = 10.2
BILAYER_R_CC = 28.5
BILAYER_D = 13.2


def monolayer_inplane() -> GateGeometry:
    """Both species in one plane; in-plane polarization."""
    return GateGeometry(2, R_MIN, R_MAX, R_RR, R_CC, R_PAIR_MIN)


def bilayer_outofplane() -> GateGeometry:
    """Control and readout planes separated along the optical axis.

    The in-plane shell starts at zero: the plane separation itself keeps
    ground states apart. r_max is the in-plane projection of the 3D zone.
    """
    return GateGeometry(2, 0.0, BILAYER_R_MAX, R_RR, BILAYER_R_CC,
                        R_PAIR_MIN, bilayer_d=BILAYER_D)


def bulk_3d() -> GateGeometry:
    """Dopants distributed in the bulk; same radii as the monolayer."""
    return GateGeometry(3, R_MIN, R_MAX, R_RR, R_CC, R_PAIR_MIN)


PRESETS = {
    "monolayer-inplane": monolayer_inplane,
    "bilayer-outofplane": bilayer_outofplane,
    "bulk-3d": bulk_3d,
}


def get_preset(name: str) -> GateGeometry:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; have {sorted(PRESETS)}") from None
