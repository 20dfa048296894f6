"""Hydrogenic valley envelopes for shallow donors in silicon.

Each conduction valley pair (+mu, -mu) along a cubic axis carries an
anisotropic envelope: the valley axis takes the longitudinal radius b, the
two transverse axes the radius a. Envelopes are normalized so that the sum
of the squared envelope over all six valleys integrates to one.
"""

from typing import Sequence

import numpy as np

from .constants import (
    BINDING_ENERGY_MEV,
    EFFECTIVE_MASS_GROUND_MEV,
    ENVELOPE_RADII_NM,
    ORBITAL_STATES,
    SPECIES,
)

# valley index convention: 0..5 = +x, -x, +y, -y, +z, -z
VALLEYS = ("+x", "-x", "+y", "-y", "+z", "-z")


def valley_axis(valley) -> int:
    """Map a valley label ('+x', '-y', ...) or index 0..5 to its axis 0..2.

    Envelopes are even under valley sign reversal, so only the axis matters.
    """
    if isinstance(valley, str):
        valley = VALLEYS.index(valley)
    if not 0 <= valley <= 5:
        raise ValueError(f"valley index out of range: {valley}")
    return valley // 2


def contraction_factor(species: str) -> float:
    """Central-cell contraction of the 1s ground envelope for a species.

    sqrt(effective-mass ground energy / measured binding energy); deeper
    donors bind tighter, so As contracts more than P and both are < 1.
    """
    if species not in SPECIES:
        raise ValueError(f"unknown species: {species!r}")
    return float(np.sqrt(EFFECTIVE_MASS_GROUND_MEV / BINDING_ENERGY_MEV[species]))


def envelope_radii(state: str, species: str) -> tuple[float, float]:
    """Effective (transverse a, longitudinal b) radii in nm.

    The contraction factor is applied to the ground state only; excited
    envelopes keep the bare effective-mass radii.
    """
    if state not in ORBITAL_STATES:
        raise ValueError(f"unknown orbital state: {state!r}")
    a, b = ENVELOPE_RADII_NM[state]
    if state == "1s":
        f = contraction_factor(species)
        return a * f, b * f
    return a, b


def envelope(state: str, species: str, valley, polarization: Sequence[float],
             points: np.ndarray) -> np.ndarray:
    """Envelope amplitude (nm^-3/2) at the given points for one valley.

    points: (n, 3) array in nm, donor at the origin. polarization is the
    optical field unit vector; it weights the excited-state lobes and is
    ignored for 1s. 2p0 lies along the valley axis, 2p+- in the transverse
    plane.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    axis = valley_axis(valley)
    t1, t2 = (axis + 1) % 3, (axis + 2) % 3
    a, b = envelope_radii(state, species)
    xi = np.sqrt((pts[:, t1] ** 2 + pts[:, t2] ** 2) / a**2
                 + pts[:, axis] ** 2 / b**2)
    if state == "1s":
        return np.exp(-xi) / np.sqrt(6.0 * np.pi * a * a * b)
    pol = np.asarray(polarization, dtype=float)
    if state == "2p0":
        return pol[axis] * pts[:, axis] * np.exp(-xi) / np.sqrt(2.0 * np.pi * a**2 * b**3)
    # 2p+-: linear combination of the two transverse lobes set by the field
    lin = pol[t1] * pts[:, t1] + pol[t2] * pts[:, t2]
    return lin * np.exp(-xi) / np.sqrt(4.0 * np.pi * a**4 * b)
