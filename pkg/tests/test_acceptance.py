"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line (printed immediately and again in the
terminal summary) and then asserts.  Long-running criteria carry the ``slow``
marker; deselect them with ``-m "not slow"``.
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest

from ncwitness import eigensolver as es
from ncwitness import sweep as sw
from ncwitness.models import ATParams, XYParams, build_ashkin_teller, build_xy, parity_operators, pauli_sum
from ncwitness.oracle import OracleConfig, classicality_distance
from ncwitness.states import MeasurementAngles, Partition, bell_state, make_classical_state
from ncwitness.witness import CorrelatorSet, XStateParams, witness_norm, xstate_witness_norm
from ncwitness.xy_fermion import factorization_point, solve_ring, symmetric_correlators

REPORT: list[str] = []


def record(label: str, ok: bool, detail: str, elapsed: float) -> None:
    line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail} [{elapsed:.1f}s]"
    REPORT.append(line)
    print(line, flush=True)


# ---------------------------------------------------------------- 1
def test_criterion_1_classical_states_zero_witness_and_distance():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst_w = worst_d = 0.0
    for i in range(1000):
        n = 2 + i % 3
        part = Partition.qubits(n)
        m = MeasurementAngles(rng.uniform(0, np.pi, n), rng.uniform(0, 2 * np.pi, n)).to_measurement()
        rho = make_classical_state(part, m, rng.dirichlet(np.ones(part.dim)))
        worst_w = max(worst_w, witness_norm(rho))
        worst_d = max(worst_d, classicality_distance(rho, OracleConfig(seed=i)).value)
    dt = time.perf_counter() - t0
    ok = worst_w <= 1e-10 and worst_d <= 1e-8 and dt < 300
    record("1 classical states", ok, f"max witness {worst_w:.2e} (<=1e-10), max distance {worst_d:.2e} (<=1e-8)", dt)
    assert ok


# ---------------------------------------------------------------- 2
def test_criterion_2_xstate_closed_form():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(10_000):
        a, b, _, d = rng.dirichlet(np.ones(4))
        b = (1 - a - d) / 2
        z = rng.uniform(-1, 1) * b
        f = rng.uniform(-1, 1) * math.sqrt(a * d)
        x = XStateParams(a, b, b, d, z, f)
        c = CorrelatorSet(G_z=a - d, G_xx=2 * (z + f), G_yy=2 * (z - f), G_zz=a + d - 2 * b)
        worst = max(worst, abs(xstate_witness_norm(c) - witness_norm(x.density_matrix())))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-12 and dt < 60
    record("2 X-state closed form", ok, f"max |closed - matrix| {worst:.2e} (<=1e-12)", dt)
    assert ok


# ---------------------------------------------------------------- 3
def test_criterion_3_bell_false_negative():
    t0 = time.perf_counter()
    rho = bell_state()
    w = witness_norm(rho)
    res = classicality_distance(rho)
    dt = time.perf_counter() - t0
    ok = w <= 1e-14 and res.value >= 0.4 and res.grid_value >= 0.4
    record("3 Bell false negative", ok,
           f"witness {w:.1e} (<=1e-14), distance {res.value:.4f}, grid {res.grid_value:.4f} (>=0.4)", dt)
    assert ok


# ---------------------------------------------------------------- 4
def _sym_witness(lam, gamma=0.6):
    return xstate_witness_norm(symmetric_correlators(solve_ring(lam, gamma)))


def test_criterion_4_xy_symmetric_curve():
    t0 = time.perf_counter()
    rows = sw.run_sweep(sw.SweepSpec(model="xy_symmetric", gamma=0.6, start=0.0, stop=3.0, steps=301))
    lam = np.array([r.param for r in rows])
    w = np.array([r.witness_norm for r in rows])
    zero_ok = w[0] <= 1e-10
    pos_ok = bool(np.all(w[lam >= 0.05 - 1e-12] > 1e-4))

    # central difference at refinement levels h, h/2, h/4: converging (changes
    # shrinking ~4x per level) at smooth points, not converging at the kink
    hs = (0.01, 0.005, 0.0025)

    def changes(x0):
        d = [(_sym_witness(x0 + h) - _sym_witness(x0 - h)) / (2 * h) for h in hs]
        return np.abs(np.diff(d))

    kink = changes(1.0)
    smooth_pts = (0.25, 0.5, 0.75, 0.9, 1.1, 1.25, 1.5, 2.0, 2.5)
    smooth = np.array([changes(x) for x in smooth_pts])
    ratio = kink[0] / smooth[:, 0].max()
    smooth_conv = smooth[:, 0] / smooth[:, 1]
    kink_ok = ratio > 5 and bool(np.all(smooth_conv > 3)) and kink[0] / kink[1] < 2
    dt = time.perf_counter() - t0
    ok = zero_ok and pos_ok and kink_ok and dt < 120
    record("4 XY symmetric curve", ok,
           f"W(0)={w[0]:.1e}, min W(lam>=0.05)={w[lam >= 0.05 - 1e-12].min():.2e}, "
           f"derivative change at lam=1 is {ratio:.0f}x the largest smooth-point change "
           f"(smooth convergence factors {smooth_conv.min():.2f}..{smooth_conv.max():.2f}, lam=1: {kink[0] / kink[1]:.2f})",
           dt)
    assert ok


# ---------------------------------------------------------------- 5
_BROKEN_CACHE: dict[float, tuple[np.ndarray, np.ndarray, sw.SweepSpec]] = {}


def _broken_sweep(gamma):
    if gamma not in _BROKEN_CACHE:
        spec = sw.SweepSpec(model="xy_broken", gamma=gamma, n_spins=12, start=0.0, stop=3.0, steps=301).resolved()
        rows = sw.run_sweep(spec)
        _BROKEN_CACHE[gamma] = (np.array([r.param for r in rows]), np.array([r.witness_norm for r in rows]), spec)
    return _BROKEN_CACHE[gamma]


@pytest.mark.slow
@pytest.mark.parametrize("gamma", [0.4, 0.6, 0.8])
def test_criterion_5_xy_broken_classical_point(gamma):
    t0 = time.perf_counter()
    lam, w, spec = _broken_sweep(gamma)
    lam_f = factorization_point(gamma)
    h = lam[1] - lam[0]
    cands = sw.find_classical_points(lam, w, threshold=1e-3)
    unique = len(cands) == 1
    i = int(np.nanargmin(w))
    near = abs(lam[i] - lam_f) <= h + 1e-12
    x_ref, w_ref = sw.refine_minimum(lambda v: sw.witness_at(spec, v), lam[max(i - 1, 0)], lam[min(i + 1, len(lam) - 1)])
    best = min(w[i], w_ref)
    ok = unique and near and best <= 1e-5
    detail = (f"gamma={gamma}: {len(cands)} candidate(s), grid argmin {lam[i]:.2f} "
              f"(lam_f={lam_f:.4f}, step {h:.2f}), grid min {w[i]:.2e}, refined {w_ref:.2e} at {x_ref:.4f} (<=1e-5)")
    if gamma == 0.6:
        j = int(np.argmin(np.abs(lam - 1.25)))
        rho = es.broken_ground_state(*_xy_broken_model(12, 0.6, 1.25), degeneracy_tol=spec.degeneracy_tol).reduced([0, 1])
        dist = classicality_distance(rho).value
        exact = i == j and w[j] <= 1e-5
        ok = ok and exact and dist <= 1e-6
        detail += f"; W(1.25)={w[j]:.2e} at the grid argmin: {exact}; oracle distance {dist:.2e} (<=1e-6)"
    dt = time.perf_counter() - t0
    record(f"5 XY broken classical point gamma={gamma}", ok, detail, dt)
    assert ok


def _xy_broken_model(n, gamma, lam):
    p = XYParams(n, gamma, lam)
    return build_xy(p), parity_operators(p)[0]


# ---------------------------------------------------------------- 6
@pytest.mark.slow
def test_criterion_6_ashkin_teller_nonclassical():
    t0 = time.perf_counter()
    deltas = np.linspace(0.0, 4.0, 41)[1:]
    w4, w8 = [], []
    for d in deltas:
        p = ATParams(8, 1.0, float(d))
        ens = es.symmetric_ground_state(build_ashkin_teller(p), parity_operators(p))
        w4.append(witness_norm(ens.reduced(range(4))))
        w8.append(witness_norm(ens.reduced(range(8))))
    w4, w8 = np.array(w4), np.array(w8)
    dt = time.perf_counter() - t0
    ok = bool(np.all(w4 > 1e-6) and np.all(w8 > 1e-6)) and dt < 3600
    record("6 Ashkin-Teller nonclassical", ok,
           f"beta=1, N=16, {len(deltas)} Delta points in (0,4]: min W quartet {w4.min():.3e}, octet {w8.min():.3e} (>1e-6)",
           dt)
    assert ok


# ---------------------------------------------------------------- 7
@pytest.mark.slow
def test_criterion_7_ashkin_teller_criticality():
    t0 = time.perf_counter()
    argmins, depths = {}, {}
    vertex = math.nan
    for n in (8, 12, 16):
        spec = sw.SweepSpec(model="ashkin_teller", param="beta", start=0.3, stop=1.0, steps=71,
                            delta=3.0, n_spins=n, block="quartet")
        rows = sw.run_sweep(spec)
        beta = np.array([r.param for r in rows])
        d = sw.derivative_scan(beta, np.array([r.witness_norm for r in rows]))
        i = int(np.argmin(d))
        argmins[n], depths[n] = round(float(beta[i]), 10), float(d[i])
        if n == 16 and 0 < i < len(d) - 1:
            # parabolic vertex through the three points around the grid minimum (reported only)
            fm, f0, fp = d[i - 1], d[i], d[i + 1]
            vertex = beta[i] - 0.5 * (beta[1] - beta[0]) * (fp - fm) / (fp - 2 * f0 + fm)
    offset = round(abs(argmins[16] - 0.61), 10)
    deepening = depths[8] > depths[12] > depths[16]
    dt = time.perf_counter() - t0
    ok = offset <= 0.03 and deepening and dt < 7200
    record("7 Ashkin-Teller criticality", ok,
           "argmin dW/dbeta " + ", ".join(f"N={n}: {argmins[n]:.2f} ({depths[n]:.4f})" for n in argmins)
           + f"; |beta*(16) - 0.61| = {offset:.2f} (<=0.03, grid resolution 0.01; sub-grid vertex {vertex:.4f})"
           + f", monotone deepening: {deepening}", dt)
    assert ok


# ---------------------------------------------------------------- 8
def _ed_correlators(n, lam, gamma):
    p = XYParams(n, gamma, lam)
    ens = es.symmetric_ground_state(build_xy(p), parity_operators(p))

    def ev(ops):
        return ens.expectation(pauli_sum(n, [(1.0, ops)]))

    return np.array([ev({0: "Z"}), ev({0: "X", 1: "X"}), ev({0: "Y", 1: "Y"}), ev({0: "Z", 1: "Z"})])


def _shanks(a, b, c):
    """Three-term extrapolation for exponentially converging sequences."""
    den = a + c - 2 * b
    safe = np.abs(den) > 1e-13
    return np.where(safe, (a * c - b * b) / np.where(safe, den, 1.0), c)


def test_criterion_8_solver_cross_validation():
    t0 = time.perf_counter()
    models = [build_xy(XYParams(10, g, lam)) for g, lam in ((0.6, 0.5), (0.6, 1.3), (1.0, 1.0), (0.0, 2.0))]
    models += [build_xy(XYParams(10, 0.6, 1.3, pinning_eps=1e-3))]
    models += [build_ashkin_teller(ATParams(5, b, d)) for b, d in ((0.64, 3.0), (1.0, 1.0), (1.5, 0.0))]
    e_err = max(abs(es.lowest_states(h, 1, seed=0).energies[0] - es.dense_lowest(h)[0][0]) for h in models)

    c_err = 0.0
    worst_at = None
    for lam in (0.5, 1.5):
        for gamma in (0.6, 1.0):
            c = symmetric_correlators(solve_ring(lam, gamma))
            free = np.array([c.G_z, c.G_xx, c.G_yy, c.G_zz])
            ext = _shanks(*(_ed_correlators(n, lam, gamma) for n in (12, 14, 16)))
            err = float(np.max(np.abs(ext - free)))
            if err > c_err:
                c_err, worst_at = err, (lam, gamma)
    dt = time.perf_counter() - t0
    ok = e_err <= 1e-10 and c_err <= 1e-3 and dt < 600
    record("8 solver cross-validation", ok,
           f"Lanczos vs dense max |dE| {e_err:.1e} (<=1e-10) over {len(models)} Hamiltonians; "
           f"free fermion vs extrapolated ED max {c_err:.1e} at {worst_at} (<=1e-3)", dt)
    assert ok
