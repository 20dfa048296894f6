"""Interaction maps: exchange energy over a plane and viability radii.

Tabulation strategy: the valley phase factors oscillate on the 0.3 nm
scale, but the j components they multiply are smooth functions of the
separation. So j is tabulated on a coarse polar grid per axis pair,
interpolated (in log space where the component keeps one sign), and the
phase factors are attached exactly at every evaluation point. Components
are tabulated on a quarter plane only; for axis-aligned polarization the
components are even under single-axis sign flips, so folding is exact.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .constants import VALLEY_K_NM
from .exchange import (ExchangeResult, IntegratorSettings, PairConfig,
                       exchange_component)


class EmptyZoneError(ValueError):
    """No map node exceeds the requested threshold."""


def _fold_ok(pol) -> bool:
    # quarter-plane folding assumes the field along a single cubic axis
    p = np.abs(np.asarray(pol, float))
    return np.count_nonzero(p > 1e-12) == 1


@dataclass
class PolarExchangeTable:
    """j components of one donor pair tabulated on (r, phi) in a plane.

    plane_offset shifts the second donor out of plane (bilayer maps).
    Evaluation folds (dx, dy) into the first quadrant and multiplies by
    the exact cosines, giving the full J on arbitrary in-plane points.
    """
    pair: PairConfig
    radii: np.ndarray
    angles: np.ndarray
    components: np.ndarray          # (3, 3, nr, nphi)
    plane_offset: float = 0.0
    _interps: list = field(default_factory=list, repr=False)

    @classmethod
    def build(cls, pair: PairConfig, r_max: float, n_r: int = 24, n_phi: int = 7,
              r_min: float = 1.0, plane_offset: float = 0.0,
              settings: IntegratorSettings | None = None) -> "PolarExchangeTable":
        if not _fold_ok(pair.polarization):
            raise ValueError("polar tabulation requires axis-aligned polarization")
        st = settings or IntegratorSettings(n_samples=30_000, n_iter=5)
        rs = np.linspace(r_min, r_max, n_r)
        phis = np.linspace(0.0, np.pi / 2.0, n_phi)
        tab = np.zeros((3, 3, n_r, n_phi))
        for ir, r in enumerate(rs):
            for ip, ph in enumerate(phis):
                R = np.array([r * np.cos(ph), r * np.sin(ph), plane_offset])
                for a in range(3):
                    for b in range(3):
                        comp = exchange_component(
                            pair, 2 * a, 2 * b, R,
                            IntegratorSettings(st.n_samples, st.n_iter,
                                               st.seed + 7 * ir + 3 * ip + 31 * a + 97 * b,
                                               st.method, st.box_pad))
                        tab[a, b, ir, ip] = comp.value
        return cls(pair, rs, phis, tab, plane_offset)

    def _interpolators(self):
        if not self._interps:
            for a in range(3):
                row = []
                for b in range(3):
                    t = self.components[a, b]
                    # log-space interpolation where the sign is uniform:
                    # exponential radial decay becomes near-linear
                    if np.all(t > 0):
                        f = RegularGridInterpolator((self.radii, self.angles), np.log(t),
                                                    bounds_error=False, fill_value=None)
                        row.append(("pos", f))
                    elif np.all(t < 0):
                        f = RegularGridInterpolator((self.radii, self.angles), np.log(-t),
                                                    bounds_error=False, fill_value=None)
                        row.append(("neg", f))
                    else:
                        f = RegularGridInterpolator((self.radii, self.angles), t,
                                                    bounds_error=False, fill_value=None)
                        row.append(("lin", f))
                self._interps.append(row)
        return self._interps

    def total(self, dx, dy) -> np.ndarray:
        """Full exchange J (ueV) at in-plane displacements (dx, dy)."""
        dx = np.asarray(dx, dtype=float)
        dy = np.asarray(dy, dtype=float)
        shape = np.broadcast(dx, dy).shape
        dxf, dyf = np.broadcast_arrays(dx, dy)
        dxf, dyf = dxf.ravel(), dyf.ravel()
        r = np.hypot(dxf, dyf)
        phi = np.arctan2(np.abs(dyf), np.abs(dxf))
        pts = np.stack([r, phi], axis=1)
        cos = np.cos(VALLEY_K_NM * np.stack(
            [dxf, dyf, np.full(dxf.size, self.plane_offset)], axis=0))
        out = np.zeros(dxf.size)
        for a in range(3):
            for b in range(3):
                kind, f = self._interpolators()[a][b]
                v = f(pts)
                if kind == "pos":
                    v = np.exp(v)
                elif kind == "neg":
                    v = -np.exp(v)
                out += 8.0 * v * cos[a] * cos[b]
        return out.reshape(shape)


@dataclass
class InteractionMap:
    """Exchange energy sampled on a uniform cell-centered plane grid."""
    x_nm: np.ndarray
    y_nm: np.ndarray
    J_ueV: np.ndarray               # shape (len(x), len(y))
    pair_name: str
    plane_offset: float = 0.0

    @property
    def spacing(self) -> float:
        return float(self.x_nm[1] - self.x_nm[0])


def pair_name(pair: PairConfig) -> str:
    return f"{pair.species1}{pair.state1}-{pair.species2}{pair.state2}"


def interaction_map(pair: PairConfig, extent: float, spacing: float = 1.0,
                    plane_offset: float = 0.0,
                    settings: IntegratorSettings | None = None,
                    table: PolarExchangeTable | None = None) -> InteractionMap:
    """Tabulate J on the plane grid [-extent, extent]^2 (cell centers).

    Cell-centered nodes avoid the singular origin configuration. A
    prebuilt table may be passed to reuse the expensive integrals.
    """
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    if table is None:
        table = PolarExchangeTable.build(
            pair, r_max=extent * np.sqrt(2.0) + spacing,
            plane_offset=plane_offset, settings=settings)
    half = np.arange(spacing / 2.0, extent, spacing)
    axis = np.concatenate([-half[::-1], half])
    X, Y = np.meshgrid(axis, axis, indexing="ij")
    J = table.total(X, Y)
    return InteractionMap(axis, axis, J, pair_name(pair), plane_offset)


def equivalent_radius(imap: InteractionMap, threshold: float) -> float:
    """Radius of the disc with the same area as the {J > threshold} zone."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    count = int(np.count_nonzero(imap.J_ueV > threshold))
    if count == 0:
        raise EmptyZoneError(f"no node exceeds {threshold} ueV")
    area = count * imap.spacing**2
    return float(np.sqrt(area / np.pi))
