"""Analytic densities of viable gate configurations.

Void-probability calculus on Poisson point patterns: a configuration is
viable when specific regions around it are empty, so each candidate
carries exp(-measure * density) weights integrated over the allowed
shells. Public densities are per cm^2 (2D) or per cm^3 (3D); all internal
math runs in nm.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import minimize_scalar

from .constants import PER_CM2_TO_PER_NM2, PER_CM3_TO_PER_NM3
from .geometry import (GateGeometry, ball_surface, ball_volume, delta_outside,
                       delta_overlap, exclusion_angle)

GATE_KINDS = ("HeisExGd", "SFG", "HeisExEx")

# readouts participating in one gate of each kind
ACTIVE_PER_GATE = {"HeisExGd": 1, "SFG": 2, "HeisExEx": 2}

REL_TOL = 1e-3


def _to_nm(density_per_cm: float, dim: int) -> float:
    return density_per_cm * (PER_CM2_TO_PER_NM2 if dim == 2 else PER_CM3_TO_PER_NM3)


def _from_nm(density_per_nm: float, dim: int) -> float:
    return density_per_nm / (PER_CM2_TO_PER_NM2 if dim == 2 else PER_CM3_TO_PER_NM3)


@dataclass
class DensityValue:
    value: float                      # per cm^dim
    kind: str = "gate"                # total | isolated | gate | active_readout
    gate_kind: Optional[str] = None
    active_fraction: Optional[float] = None

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("density must be nonnegative")


@dataclass
class DensityCurve:
    gate_kind: str
    input_density: np.ndarray         # per cm^dim, strictly increasing
    active_density: np.ndarray
    active_percent: np.ndarray
    control_density: Optional[float] = None

    def __post_init__(self):
        if np.any(np.diff(self.input_density) <= 0):
            raise ValueError("input densities must be strictly increasing")


def isolated_density(total_density: float, radius: float, dim: int) -> DensityValue:
    """Density of points with no neighbour within the given radius."""
    if total_density < 0:
        raise ValueError("density must be nonnegative")
    if radius <= 0:
        raise ValueError("radius must be positive")
    d_nm = _to_nm(total_density, dim)
    value = d_nm * math.exp(-float(ball_volume(dim, radius)) * d_nm)
    return DensityValue(_from_nm(value, dim), kind="isolated")


def optimal_isolation_density(radius: float, dim: int) -> tuple[float, float, float]:
    """(optimal total density, isolated density there, isolated fraction).

    The isolated density D exp(-V D) peaks at D = 1/V with fraction 1/e.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    v = float(ball_volume(dim, radius))
    d_star = _from_nm(1.0 / v, dim)
    return d_star, d_star / math.e, 1.0 / math.e


def bilayer_projection(zone_radius_3d: float, separation: float) -> float:
    """In-plane outer radius of a ball zone cut by a parallel plane."""
    if not 0 <= separation <= zone_radius_3d:
        raise ValueError("separation must lie in [0, zone radius]")
    return math.sqrt(zone_radius_3d**2 - separation**2)


def _gauss(a: float, b: float, n: int):
    x, w = leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def _heis_gd_shell(d_r_nm: float, geom: GateGeometry, n: int) -> float:
    r, w = _gauss(geom.r_min, geom.r_max, n)
    d1 = delta_outside(geom.dimension, r, geom.r_rr, geom.r_max)
    zone = float(ball_volume(geom.dimension, geom.r_max))
    return float(np.sum(w * ball_surface(geom.dimension, r) * d_r_nm
                        * np.exp(-(zone + d1) * d_r_nm)))


def heis_ex_gd_density(control_density: float, readout_density: float,
                       geom: GateGeometry) -> DensityValue:
    """Density of excited-ground gates: an isolated control with exactly
    one readout in its viability shell, that readout isolated in turn.

    The readout factor is a first-nearest-neighbour density: one power of
    D_r times the void weight exp(-(V(R_max) + delta1) D_r).
    """
    if control_density < 0 or readout_density < 0:
        raise ValueError("densities must be nonnegative")
    dim = geom.dimension
    dc = _to_nm(control_density, dim)
    dr = _to_nm(readout_density, dim)
    ctrl = dc * math.exp(-float(ball_volume(dim, geom.r_cc)) * dc)
    n = 32
    est = _heis_gd_shell(dr, geom, n)
    while True:
        n *= 2
        nxt = _heis_gd_shell(dr, geom, n)
        if abs(nxt - est) <= REL_TOL * max(abs(nxt), 1e-300) or n >= 512:
            est = nxt
            break
        est = nxt
    gates = ctrl * est
    frac = gates / dr if dr > 0 else 0.0
    return DensityValue(_from_nm(gates, dim), "active_readout", "HeisExGd", frac)


_sfg_node_cache: dict = {}


def _sfg_nodes(geom: GateGeometry, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes (weight, delta_SFG) for the SFG triple integral.

    The exclusion measures do not depend on the densities, so nodes are
    cached per geometry and reused across a whole density scan.
    """
    key = (geom, n)
    if key in _sfg_node_cache:
        return _sfg_node_cache[key]
    dim = geom.dimension
    weights, deltas = [], []
    r1s, w1s = _gauss(geom.r_min, geom.r_max, n)
    for r1, w1 in zip(r1s, w1s):
        d1_first = float(delta_outside(dim, r1, geom.r_rr, geom.r_max))
        r2s, w2s = _gauss(r1, geom.r_max, n)
        for r2, w2 in zip(r2s, w2s):
            alpha = float(exclusion_angle(r1, r2, geom.r_rr))
            if alpha >= np.pi:
                continue
            d1_second = float(delta_outside(dim, r2, geom.r_rr, geom.r_max))
            ths, wts = _gauss(alpha, np.pi, n)
            for th, wt in zip(ths, wts):
                if dim == 2:
                    ang = 2.0 * r2
                else:
                    ang = 2.0 * np.pi * r2**2 * np.sin(th)
                dov = delta_overlap(dim, r1, r2, th, geom.r_rr, geom.r_max)
                weights.append(w1 * w2 * wt * float(ball_surface(dim, r1)) * ang)
                deltas.append(d1_first + d1_second - dov)
    out = (np.asarray(weights), np.asarray(deltas))
    _sfg_node_cache[key] = out
    return out


def sfg_density(control_density: float, readout_density: float,
                geom: GateGeometry, n_nodes: int = 0) -> DensityValue:
    """Active-readout density of two-readout (SFG) gates.

    Triple quadrature over both shell radii and the opening angle; the
    shared exclusion measure delta_ov keeps double-counted voids out of
    the exponent. Reported value counts both readouts of each gate.
    """
    if control_density < 0 or readout_density < 0:
        raise ValueError("densities must be nonnegative")
    dim = geom.dimension
    dc = _to_nm(control_density, dim)
    dr = _to_nm(readout_density, dim)
    ctrl = dc * math.exp(-float(ball_volume(dim, geom.r_cc)) * dc)
    zone = float(ball_volume(dim, geom.r_max))

    def evaluate(n):
        w, dl = _sfg_nodes(geom, n)
        return float(np.sum(w * dr**2 * np.exp(-(zone + dl) * dr)))

    if n_nodes:
        gates = ctrl * evaluate(n_nodes)
    else:
        n = 16
        est = evaluate(n)
        while True:
            n = int(n * 1.5)
            nxt = evaluate(n)
            if abs(nxt - est) <= REL_TOL * max(abs(nxt), 1e-300) or n >= 54:
                est = nxt
                break
            est = nxt
        gates = ctrl * est
    active = 2.0 * gates
    frac = active / dr if dr > 0 else 0.0
    return DensityValue(_from_nm(active, dim), "active_readout", "SFG", frac)


def heis_ex_ex_density(total_density: float, geom: GateGeometry) -> DensityValue:
    """Active-dopant density of excited-excited pairs in one species.

    A dopant is active when its nearest neighbour sits between r_pair_min
    and r_cc and the surrounding r_cc void (less the lens already counted)
    is empty; both pair members count.
    """
    if total_density < 0:
        raise ValueError("density must be nonnegative")
    dim = geom.dimension
    d = _to_nm(total_density, dim)
    zone = float(ball_volume(dim, geom.r_cc))

    def evaluate(n):
        r, w = _gauss(geom.r_pair_min, geom.r_cc, n)
        d1 = delta_outside(dim, r, geom.r_cc, geom.r_cc)
        return float(np.sum(w * ball_surface(dim, r) * d * np.exp(-(zone + d1) * d)))

    n = 32
    frac = evaluate(n)
    while True:
        n *= 2
        nxt = evaluate(n)
        if abs(nxt - frac) <= REL_TOL * max(abs(nxt), 1e-300) or n >= 512:
            frac = nxt
            break
        frac = nxt
    return DensityValue(_from_nm(d * frac, dim), "active_readout", "HeisExEx", frac)


def gate_density(kind: str, control_density: float, readout_density: float,
                 geom: GateGeometry) -> DensityValue:
    if kind == "HeisExGd":
        return heis_ex_gd_density(control_density, readout_density, geom)
    if kind == "SFG":
        return sfg_density(control_density, readout_density, geom)
    if kind == "HeisExEx":
        return heis_ex_ex_density(readout_density, geom)
    raise ValueError(f"unknown gate kind: {kind!r}")


def density_scan(kind: str, geom: GateGeometry, readout_densities,
                 control_density: Optional[float] = None) -> DensityCurve:
    """Active density and percentage across readout densities.

    The control density defaults to the isolation optimum 1/V(r_cc); the
    excited-excited kind has no separate control species and ignores it.
    """
    if kind not in GATE_KINDS:
        raise ValueError(f"unknown gate kind: {kind!r}")
    dr = np.asarray(readout_densities, dtype=float)
    if control_density is None:
        control_density = optimal_isolation_density(geom.r_cc, geom.dimension)[0]
    act = np.empty(dr.size)
    pct = np.empty(dr.size)
    for i, d in enumerate(dr):
        v = gate_density(kind, control_density, float(d), geom)
        act[i] = v.value
        pct[i] = 100.0 * (v.active_fraction or 0.0)
    return DensityCurve(kind, dr, act, pct, control_density)


def peak_density(kind: str, geom: GateGeometry, lo: float, hi: float,
                 control_density: Optional[float] = None,
                 percent: bool = False) -> tuple[float, float]:
    """(argmax readout density, peak value) of a gate-density curve.

    Bounded scalar maximization over [lo, hi] (per cm^dim). With percent
    set, maximizes the active percentage instead of the active density.
    """
    if control_density is None:
        control_density = optimal_isolation_density(geom.r_cc, geom.dimension)[0]

    def neg(d):
        v = gate_density(kind, control_density, float(d), geom)
        return -(100.0 * (v.active_fraction or 0.0) if percent else v.value)

    res = minimize_scalar(neg, bounds=(lo, hi), method="bounded",
                          options={"xatol": (hi - lo) * 1e-4})
    return float(res.x), float(-res.fun)
