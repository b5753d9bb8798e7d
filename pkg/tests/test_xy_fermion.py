from __future__ import annotations

import math

import numpy as np
import pytest

from ncwitness import eigensolver as es
from ncwitness.models import XYParams, build_xy, parity_operators, pauli_sum
from ncwitness.xy_fermion import (
    contractions,
    factorization_point,
    solve_ring,
    symmetric_correlators,
    symmetric_witness_curve,
)


def _ed_correlators(n, lam, gamma):
    """Even-parity ground state correlators (G_z, G_xx, G_yy, G_zz) and energy per site."""
    p = XYParams(n, gamma, lam)
    h = build_xy(p)
    res = es.lowest_in_sector(h, parity_operators(p), [1], seed=0)
    v = res.vectors[0]

    def ev(items):
        return pauli_sum(n, items).expectation(v).real

    return np.array([
        ev([(1.0, {0: "Z"})]), ev([(1.0, {0: "X", 1: "X"})]),
        ev([(1.0, {0: "Y", 1: "Y"})]), ev([(1.0, {0: "Z", 1: "Z"})]),
    ]), res.energies[0] / n


def _fermion(lam, gamma, n):
    c = symmetric_correlators(solve_ring(lam, gamma, n))
    return np.array([c.G_z, c.G_xx, c.G_yy, c.G_zz])


def test_field_only_limit():
    c = symmetric_correlators(solve_ring(0.0, 0.6))
    assert (c.G_z, c.G_xx, c.G_yy, c.G_zz) == pytest.approx((1, 0, 0, 1), abs=1e-14)
    assert solve_ring(0.0, 0.6).energy_density == pytest.approx(-1.0, abs=1e-15)


@pytest.mark.parametrize("lam,gamma", [(0.5, 0.6), (1.5, 0.6), (1.0, 1.0), (2.0, 0.3)])
def test_even_sector_matches_ed_exactly(lam, gamma):
    # the antiperiodic grid is the exact even-parity sector of the finite ring
    corr, e = _ed_correlators(8, lam, gamma)
    assert np.allclose(_fermion(lam, gamma, 8), corr, atol=1e-9)
    assert solve_ring(lam, gamma, 8).energy_density == pytest.approx(e, abs=1e-10)


def test_critical_ising_energy_closed_form():
    for n in (8, 64, 2048):
        exact = -(2 / n) / math.sin(math.pi / (2 * n))
        assert solve_ring(1.0, 1.0, n).energy_density == pytest.approx(exact, abs=1e-12)
    assert solve_ring(1.0, 1.0).energy_density == pytest.approx(-4 / math.pi, abs=1e-6)


def test_energy_matches_extrapolated_ed():
    e12 = _ed_correlators(12, 1.0, 1.0)[1]
    e14 = _ed_correlators(14, 1.0, 1.0)[1]
    ext = (14**2 * e14 - 12**2 * e12) / (14**2 - 12**2)
    f = solve_ring(1.0, 1.0).energy_density
    assert abs(e14 - f) < 3e-3
    assert abs(ext - f) < 1e-3


def test_correlators_match_ed_off_criticality():
    c12, _ = _ed_correlators(12, 0.5, 0.6)
    c14, _ = _ed_correlators(14, 0.5, 0.6)
    ext = (14**2 * c14 - 12**2 * c12) / (14**2 - 12**2)
    f = _fermion(0.5, 0.6, 2048)
    assert np.max(np.abs(c14 - f)) < 5e-3
    assert np.max(np.abs(ext - f)) < 1e-4


def test_mode_convergence():
    assert np.allclose(_fermion(0.8, 0.6, 1024), _fermion(0.8, 0.6, 2048), atol=1e-8)


def test_isotropic_chain():
    for lam in (0.3, 0.9, 1.7, 2.5):
        c = symmetric_correlators(solve_ring(lam, 0.0))
        assert c.G_xx == c.G_yy


def test_ring_invariants():
    for lam, g in ((1.0, 0.0), (1.0, 0.6), (3.0, 0.2), (0.7, 1.0)):
        ring = solve_ring(lam, g, 256)
        assert np.all(ring.dispersion >= 0)
        assert np.all(np.abs(contractions(ring, 4).G) <= 1 + 1e-12)


def test_solve_ring_errors():
    with pytest.raises(ValueError):
        solve_ring(-0.1, 0.5)
    with pytest.raises(ValueError):
        solve_ring(1.0, 1.5)
    with pytest.raises(ValueError):
        solve_ring(1.0, 0.5, 15)


def test_factorization_point():
    assert factorization_point(0.6) == pytest.approx(1.25, abs=1e-15)
    assert factorization_point(0.8) == pytest.approx(5 / 3, abs=1e-15)
    assert factorization_point(0.4) == pytest.approx(1.0910894511799618, abs=1e-15)
    assert factorization_point(1.0) == math.inf
    for bad in (0.0, -0.2, 1.2):
        with pytest.raises(ValueError):
            factorization_point(bad)


def test_symmetric_curve_shape():
    lam, w = symmetric_witness_curve(0.6, np.linspace(0, 3, 31))
    assert w[0] < 1e-12 and np.all(w[1:] > 1e-4)
    with pytest.raises(ValueError):
        symmetric_witness_curve(0.6, [-1.0])
