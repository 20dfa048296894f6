"""Exchange integral tests.

The central check replaces the anisotropic multivalley envelopes with a
plain isotropic exponential, for which the Heitler-London exchange
integral has a closed form (Sugiura's classic result for the hydrogen
molecule, rescaled to our units and per-valley normalization). That
certifies the 6-dimensional Monte Carlo machinery end to end; the real
envelopes then only change the integrand, not the estimator.
"""

import math

import numpy as np
import pytest
from scipy.special import expi

import donorgates.exchange as exch
from donorgates.constants import SCREENED_COULOMB_UEV_NM
from donorgates.exchange import (
    ExchangeResult,
    IntegratorSettings,
    PairConfig,
    SingularConfigurationError,
    exchange_component,
    exchange_total,
)

EULER = 0.5772156649015329
ISO_RADIUS = 2.0


def _sugiura(rho: float) -> float:
    # dimensionless exchange integral for unit-radius isotropic 1s orbitals
    s = math.exp(-rho) * (1.0 + rho + rho**2 / 3.0)
    sp = math.exp(rho) * (1.0 - rho + rho**2 / 3.0)
    poly = (1.0 / 5.0) * (25.0 / 8.0 - 23.0 / 4.0 * rho - 3.0 * rho**2
                          - rho**3 / 3.0) * math.exp(-2.0 * rho)
    logs = (6.0 / (5.0 * rho)) * (s * s * (EULER + math.log(rho))
                                  + sp * sp * expi(-4.0 * rho)
                                  - 2.0 * s * sp * expi(-2.0 * rho))
    return poly + logs


def _iso_envelope(state, species, valley, polarization, points):
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    r = np.linalg.norm(pts, axis=1)
    return np.exp(-r / ISO_RADIUS) / np.sqrt(6.0 * np.pi * ISO_RADIUS**3)


PAIR = PairConfig("1s", "P", "1s", "As")


@pytest.mark.parametrize("sep", [6.0, 10.0, 14.0])
def test_closed_form_isotropic_exchange(monkeypatch, sep):
    """Adaptive estimator against the closed-form isotropic integral."""
    monkeypatch.setattr(exch, "envelope", _iso_envelope)
    rho = sep / ISO_RADIUS
    # per-valley envelopes carry 1/sqrt(6) each, hence the 1/36
    exact = SCREENED_COULOMB_UEV_NM * _sugiura(rho) / (36.0 * ISO_RADIUS)
    got = exchange_component(PAIR, 0, 0, [sep, 0.0, 0.0],
                             IntegratorSettings(n_samples=400_000, seed=3))
    assert got.value == pytest.approx(exact, rel=0.01)
    assert abs(got.value - exact) < 4.0 * got.stat_error


def test_adaptive_matches_plain_cross_check():
    """Two independent estimators agree within combined statistics."""
    vectors = [(8.0, 3.0, 0.0), (12.0, 0.0, 0.0), (6.0, 6.0, 2.0),
               (15.0, 4.0, 0.0), (10.0, 0.0, 5.0)]
    for sep in vectors:
        ad = exchange_component(PAIR, 0, 2, sep,
                                IntegratorSettings(n_samples=200_000, seed=1))
        pl = exchange_component(PAIR, 0, 2, sep,
                                IntegratorSettings(n_samples=1_000_000, seed=2,
                                                   method="plain"))
        sigma = math.hypot(ad.stat_error, pl.stat_error)
        assert abs(ad.value - pl.value) <= 3.0 * sigma, sep
        # the importance sampler should never be the noisier one here
        assert ad.stat_error < pl.stat_error


def test_component_parity():
    """j(R) = j(-R): envelope products are even under inversion."""
    for seps in ([9.0, 2.0, 0.0], [7.0, 5.0, 3.0]):
        sep = np.asarray(seps)
        fwd = exchange_component(PAIR, 0, 4, sep,
                                 IntegratorSettings(n_samples=200_000, seed=5))
        bwd = exchange_component(PAIR, 0, 4, -sep,
                                 IntegratorSettings(n_samples=200_000, seed=6))
        sigma = math.hypot(fwd.stat_error, bwd.stat_error)
        assert abs(fwd.value - bwd.value) <= 3.0 * sigma


def test_total_parity_and_composition():
    sep = [8.5, 4.0, 0.0]
    st = IntegratorSettings(n_samples=60_000)
    fwd = exchange_total(PAIR, sep, st)
    bwd = exchange_total(PAIR, [-v for v in sep], st)
    sigma = math.hypot(fwd.stat_error, bwd.stat_error)
    assert abs(fwd.value - bwd.value) <= 3.0 * sigma
    assert fwd.n_samples == 9 * st.n_samples // st.n_iter * st.n_iter


def test_coincident_donors_rejected():
    with pytest.raises(SingularConfigurationError):
        exchange_component(PAIR, 0, 0, [0.0, 0.0, 0.0])
    with pytest.raises(SingularConfigurationError):
        exchange_total(PAIR, [0.0, 0.0, 0.0])


def test_deterministic_given_seed():
    st = IntegratorSettings(n_samples=40_000, seed=12)
    one = exchange_component(PAIR, 0, 0, [10.0, 0.0, 0.0], st)
    two = exchange_component(PAIR, 0, 0, [10.0, 0.0, 0.0], st)
    assert one.value == two.value
    assert one.stat_error == two.stat_error


def test_result_metadata():
    res = exchange_component(PAIR, 0, 0, [10.0, 0.0, 0.0],
                             IntegratorSettings(n_samples=30_000, method="plain"))
    assert isinstance(res, ExchangeResult)
    assert res.method == "plain"
    assert res.n_samples == 30_000
    assert res.stat_error > 0.0


def test_polarization_steers_excited_exchange():
    # in-plane separation: an in-plane field pumps different lobes than an
    # out-of-plane one, so the couplings must differ well beyond noise
    pair_x = PairConfig("2ppm", "P", "2ppm", "P", polarization=(1.0, 0.0, 0.0))
    pair_z = PairConfig("2ppm", "P", "2ppm", "P", polarization=(0.0, 0.0, 1.0))
    st = IntegratorSettings(n_samples=60_000, seed=8)
    jx = exchange_component(pair_x, 0, 0, [12.0, 5.0, 0.0], st)
    jz = exchange_component(pair_z, 0, 0, [12.0, 5.0, 0.0], st)
    assert abs(jx.value - jz.value) > 5.0 * math.hypot(jx.stat_error, jz.stat_error)
