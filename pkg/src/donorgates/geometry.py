"""Closed-form and sampled measures for gate-viability regions.

Everything here is deterministic geometry: ball measures, the exclusion
angle between two readout shells, lens (two-ball intersection) measures,
the three-circle overlap, and the delta exclusion measures entering the
gate-density integrals. A uniform-sampling estimator doubles as the test
oracle for every analytic expression.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


@dataclass(frozen=True)
class GateGeometry:
    """Viability radii (nm) of one gate scenario.

    r_min/r_max bound the shell where a readout couples to an excited
    control only; r_rr isolates readouts from each other; r_cc isolates
    controls; r_pair_min is the minimum separation of an excited-excited
    pair. bilayer_d is the plane separation when control and readout
    species sit in different planes (in-plane r_min is then 0).
    """
    dimension: int
    r_min: float
    r_max: float
    r_rr: float
    r_cc: float
    r_pair_min: float
    bilayer_d: Optional[float] = None

    def __post_init__(self):
        if self.dimension not in (2, 3):
            raise ValueError("dimension must be 2 or 3")
        if not 0 <= self.r_min < self.r_max:
            raise ValueError("need 0 <= r_min < r_max")
        if self.r_rr <= 0:
            raise ValueError("r_rr must be positive")
        if self.r_cc < self.r_max:
            raise ValueError("r_cc must be >= r_max")
        if self.bilayer_d is not None:
            if self.r_min != 0:
                raise ValueError("bilayer geometry has in-plane r_min = 0")
            if self.bilayer_d <= 0:
                raise ValueError("bilayer separation must be positive")


@dataclass
class RegionMeasure:
    """Area (nm^2) or volume (nm^3) and how it was evaluated."""
    value: float
    method: str = "analytic"        # "analytic" | "sampled"
    statistical_error: float = 0.0

    def __post_init__(self):
        if self.value < 0 and self.method == "analytic":
            # tiny negative round-off from closed forms is clamped
            if self.value > -1e-9:
                self.value = 0.0
            else:
                raise ValueError("negative region measure")


def ball_measures(dim: int, r: float) -> tuple[float, float]:
    """(volume, surface) of the r-ball: (pi r^2, 2 pi r) or (4/3 pi r^3, 4 pi r^2)."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    if dim == 2:
        return float(np.pi * r * r), float(2.0 * np.pi * r)
    if dim == 3:
        return float(4.0 / 3.0 * np.pi * r**3), float(4.0 * np.pi * r * r)
    raise ValueError(f"unsupported dimension {dim}")


def ball_volume(dim: int, r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return np.pi * r**2 if dim == 2 else 4.0 / 3.0 * np.pi * r**3


def ball_surface(dim: int, r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return 2.0 * np.pi * r if dim == 2 else 4.0 * np.pi * r**2


def exclusion_angle(r1, r2, r_rr) -> np.ndarray:
    """Angle at the control under which the r_rr ball around readout 1
    shadows directions for readout 2.

    Law of cosines with the argument clamped to [-1, 1]; the clamp to -1
    returns pi when the triangle inequality fails (readouts can never be
    far enough apart), the clamp to +1 returns 0.
    """
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    arg = (r1**2 + r2**2 - np.asarray(r_rr, float) ** 2) / (2.0 * r1 * r2)
    return np.arccos(np.clip(arg, -1.0, 1.0))


def restricted_surface(dim: int, r2, alpha) -> np.ndarray:
    """Shell surface available to readout 2 outside the exclusion cone.

    2D: arc of opening 2(pi - alpha). 3D: sphere minus the spherical cap
    of half-angle alpha, i.e. 2 pi r^2 (1 + cos alpha).
    """
    r2 = np.asarray(r2, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if dim == 2:
        return 2.0 * (np.pi - alpha) * r2
    if dim == 3:
        return 2.0 * np.pi * r2**2 * (1.0 + np.cos(alpha))
    raise ValueError(f"unsupported dimension {dim}")


def _lens_area(rA, rB, d) -> np.ndarray:
    rA, rB, d = np.broadcast_arrays(*(np.asarray(v, float) for v in (rA, rB, d)))
    out = np.where(d <= np.abs(rA - rB), np.pi * np.minimum(rA, rB) ** 2, 0.0)
    mid = (d > np.abs(rA - rB)) & (d < rA + rB)
    if np.any(mid):
        a, b, dd = rA[mid], rB[mid], d[mid]
        t1 = a**2 * np.arccos(np.clip((dd**2 + a**2 - b**2) / (2 * dd * a), -1, 1))
        t2 = b**2 * np.arccos(np.clip((dd**2 + b**2 - a**2) / (2 * dd * b), -1, 1))
        t3 = 0.5 * np.sqrt(np.maximum(
            (-dd + a + b) * (dd + a - b) * (dd - a + b) * (dd + a + b), 0.0))
        out[mid] = t1 + t2 - t3
    return out


def _lens_volume(rA, rB, d) -> np.ndarray:
    rA, rB, d = np.broadcast_arrays(*(np.asarray(v, float) for v in (rA, rB, d)))
    out = np.where(d <= np.abs(rA - rB), 4.0 / 3.0 * np.pi * np.minimum(rA, rB) ** 3, 0.0)
    mid = (d > np.abs(rA - rB)) & (d < rA + rB)
    if np.any(mid):
        a, b, dd = rA[mid], rB[mid], d[mid]
        out[mid] = (np.pi * (a + b - dd) ** 2
                    * (dd**2 + 2 * dd * b - 3 * b**2 + 2 * dd * a + 6 * a * b - 3 * a**2)
                    / (12.0 * dd))
    return out


def lens_values(dim: int, rA, rB, d) -> np.ndarray:
    """Vectorized lens measure (intersection of two balls)."""
    if dim == 2:
        return _lens_area(rA, rB, d)
    if dim == 3:
        return _lens_volume(rA, rB, d)
    raise ValueError(f"unsupported dimension {dim}")


def lens_measure(dim: int, rA: float, rB: float, centre_distance: float) -> RegionMeasure:
    if rA < 0 or rB < 0 or centre_distance < 0:
        raise ValueError("radii and distance must be nonnegative")
    return RegionMeasure(float(lens_values(dim, rA, rB, centre_distance)))


_DEGENERATE_TOL = 1e-9


def _triple_area_arcs(centres: np.ndarray, radii: np.ndarray) -> float:
    """Common area of three discs by Green's theorem over boundary arcs.

    Each circle's boundary is cut at its intersections with the other two;
    sub-arcs whose midpoint lies inside both other discs bound the common
    region and contribute the standard line-integral term.
    """
    total = 0.0
    for i in range(3):
        cuts = [0.0]
        for j in range(3):
            if i == j:
                continue
            d = float(np.hypot(*(centres[j] - centres[i])))
            if d >= radii[i] + radii[j]:
                return 0.0                      # a disjoint pair empties the overlap
            if d + radii[i] <= radii[j]:
                continue                        # circle i inside j: no cut from j
            if d + radii[j] <= radii[i]:
                continue                        # j inside i: i's boundary uncut by j
            base = np.arctan2(centres[j][1] - centres[i][1],
                              centres[j][0] - centres[i][0])
            half = np.arccos(np.clip(
                (d**2 + radii[i] ** 2 - radii[j] ** 2) / (2 * d * radii[i]), -1, 1))
            cuts += [(base - half) % (2 * np.pi), (base + half) % (2 * np.pi)]
        cuts = sorted(set(cuts))
        cuts.append(cuts[0] + 2 * np.pi)
        for t0, t1 in zip(cuts[:-1], cuts[1:]):
            tm = 0.5 * (t0 + t1)
            p = centres[i] + radii[i] * np.array([np.cos(tm), np.sin(tm)])
            if all(np.hypot(*(p - centres[j])) <= radii[j] + 1e-12
                   for j in range(3) if j != i):
                total += 0.5 * (radii[i] ** 2 * (t1 - t0)
                                + radii[i] * (centres[i][0] * (np.sin(t1) - np.sin(t0))
                                              - centres[i][1] * (np.cos(t1) - np.cos(t0))))
    return total


def _triple_degenerate(centres, radii) -> bool:
    for i in range(3):
        for j in range(i + 1, 3):
            d = float(np.hypot(*(centres[j] - centres[i])))
            if (abs(d - (radii[i] + radii[j])) < _DEGENERATE_TOL
                    or abs(d - abs(radii[i] - radii[j])) < _DEGENERATE_TOL):
                if d > _DEGENERATE_TOL:         # exact coincidence handled fine
                    return True
    return False


def triple_overlap_area(centres, radii, samples: int = 200_000,
                        seed: int = 0) -> RegionMeasure:
    """Area of the common intersection of three circles.

    Analytic arc decomposition; tangency-degenerate inputs fall back to
    the sampling oracle (flagged in the result's method field).
    """
    c = np.asarray(centres, dtype=float).reshape(3, 2)
    r = np.asarray(radii, dtype=float)
    if np.any(r < 0):
        raise ValueError("radii must be nonnegative")
    # coincident identical circles would each contribute their full uncut
    # boundary; collapse duplicates to the 1- and 2-circle closed forms
    keep: list[int] = []
    for i in range(3):
        if not any(np.hypot(*(c[i] - c[k])) < _DEGENERATE_TOL
                   and abs(r[i] - r[k]) < _DEGENERATE_TOL for k in keep):
            keep.append(i)
    if len(keep) == 1:
        return RegionMeasure(float(np.pi * r[keep[0]] ** 2))
    if len(keep) == 2:
        i, j = keep
        d = float(np.hypot(*(c[j] - c[i])))
        return RegionMeasure(float(lens_values(2, r[i], r[j], d)))
    if _triple_degenerate(c, r):
        lo = np.max(c - r[:, None], axis=0)
        hi = np.min(c + r[:, None], axis=0)
        if np.any(hi <= lo):
            return RegionMeasure(0.0)
        ind = lambda p: np.all(
            np.linalg.norm(p[:, None, :] - c[None, :, :], axis=2) <= r[None, :], axis=1)
        return sampled_region_measure(ind, lo, hi, samples, seed)
    return RegionMeasure(max(_triple_area_arcs(c, r), 0.0))


def delta_outside(dim: int, r1, isolation_radius: float, zone_radius: float) -> np.ndarray:
    """Measure of the isolation ball around a shell point lying outside
    the zone ball: V(iso) minus the lens shared with the zone.
    """
    r1 = np.asarray(r1, dtype=float)
    if np.any(r1 < 0) or np.any(r1 > zone_radius):
        raise ValueError("shell radius must lie in [0, zone_radius]")
    return ball_volume(dim, isolation_radius) - lens_values(
        dim, isolation_radius, zone_radius, r1)


def delta_overlap(dim: int, r1: float, r2: float, theta: float,
                  isolation_radius: float, zone_radius: float,
                  target_rel_error: float = 0.02, seed: int = 0) -> float:
    """Shared part of two readouts' exclusion measures outside the zone.

    2D: two-circle lens minus the three-circle overlap with the zone,
    both closed-form. 3D: sampled to the target relative error (the value
    only enters an exponent under an outer quadrature).
    """
    if not 0 <= theta <= np.pi + 1e-12:
        raise ValueError("theta must lie in [0, pi]")
    for r in (r1, r2):
        if not 0 <= r <= zone_radius:
            raise ValueError("shell radii must lie in [0, zone_radius]")
    p1 = np.array([r1, 0.0])
    p2 = np.array([r2 * np.cos(theta), r2 * np.sin(theta)])
    d12 = float(np.hypot(*(p1 - p2)))
    if d12 >= 2.0 * isolation_radius:
        return 0.0
    if dim == 2:
        both = float(lens_values(2, isolation_radius, isolation_radius, d12))
        inside = triple_overlap_area(
            [p1, p2, (0.0, 0.0)],
            [isolation_radius, isolation_radius, zone_radius]).value
        return max(both - inside, 0.0)
    # 3D: readout positions span a plane; sample the intersection slab
    q1 = np.array([r1, 0.0, 0.0])
    q2 = np.array([r2 * np.cos(theta), r2 * np.sin(theta), 0.0])
    lo = np.maximum(q1 - isolation_radius, q2 - isolation_radius)
    hi = np.minimum(q1 + isolation_radius, q2 + isolation_radius)
    if np.any(hi <= lo):
        return 0.0

    def ind(p):
        in1 = np.linalg.norm(p - q1, axis=1) <= isolation_radius
        in2 = np.linalg.norm(p - q2, axis=1) <= isolation_radius
        return in1 & in2 & (np.linalg.norm(p, axis=1) > zone_radius)

    n = 20_000
    rng_seed = seed
    while True:
        m = sampled_region_measure(ind, lo, hi, n, rng_seed)
        if m.value == 0.0:
            return 0.0
        if m.statistical_error <= target_rel_error * m.value or n >= 5_000_000:
            return m.value
        n *= 4


def sampled_region_measure(indicator: Callable[[np.ndarray], np.ndarray],
                           box_lo, box_hi, samples: int,
                           seed: int = 0) -> RegionMeasure:
    """Uniform-sampling measure of {indicator} within an axis-aligned box.

    Returns hit-fraction times box measure with the binomial standard
    error. The indicator must accept an (n, dim) array.
    """
    if samples <= 0:
        raise ValueError("samples must be positive")
    lo = np.atleast_1d(np.asarray(box_lo, dtype=float))
    hi = np.atleast_1d(np.asarray(box_hi, dtype=float))
    rng = np.random.default_rng(seed)
    pts = rng.uniform(lo, hi, (samples, lo.size))
    hits = int(np.count_nonzero(indicator(pts)))
    box = float(np.prod(hi - lo))
    frac = hits / samples
    err = box * np.sqrt(max(frac * (1.0 - frac), 1.0 / samples) / samples)
    return RegionMeasure(box * frac, "sampled", float(err))
