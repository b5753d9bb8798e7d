"""Quick invariant checks runnable from the CLI without the test suite."""

from __future__ import annotations

from typing import Callable

import numpy as np

from . import eigensolver as es
from .linalg import commutator, kron, partial_trace, trace_norm, trace_norm_svd
from .models import ATParams, XYParams, build_ashkin_teller, build_xy, parity_operators
from .oracle import OracleConfig, classicality_distance
from .states import (
    MeasurementAngles,
    Partition,
    apply_measurement,
    bell_state,
    make_classical_state,
    random_density_matrix,
    random_unitary,
)
from .witness import CorrelatorSet, witness_norm, xstate_from_correlators, xstate_witness_norm
from .xy_fermion import solve_ring, symmetric_correlators


def _linalg(rng):
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    a = a + a.conj().T
    b = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    b = b + b.conj().T
    c = commutator(a, b)
    u = random_unitary(4, rng)
    ok = np.max(np.abs(c + c.conj().T)) < 1e-12
    ok &= abs(trace_norm(c) - trace_norm_svd(c)) < 1e-10
    ok &= abs(trace_norm(u @ c @ u.conj().T) - trace_norm(c)) < 1e-10
    rho = random_density_matrix(Partition.qubits(3), rng).matrix
    ok &= abs(partial_trace(rho, [2, 2, 2], []).item() - 1) < 1e-12
    x = rng.integers(-9, 10, (2, 2)).astype(float)
    ok &= np.array_equal(kron(kron(x, x), x), kron(x, kron(x, x)))
    return ok


def _measurement(rng):
    part = Partition.qubits(3)
    ok = True
    for _ in range(20):
        rho = random_density_matrix(part, rng)
        m = MeasurementAngles(rng.uniform(0, np.pi, 3), rng.uniform(0, 2 * np.pi, 3)).to_measurement()
        once = apply_measurement(rho, m)
        ok &= np.max(np.abs(apply_measurement(once, m).matrix - once.matrix)) < 1e-12
        ok &= abs(np.trace(once.matrix) - 1) < 1e-12
    return ok


def _witness(rng):
    ok = True
    for _ in range(200):
        gz, gxx, gyy, gzz = rng.uniform(-1, 1, 4)
        try:
            x = xstate_from_correlators(CorrelatorSet(gz, gxx, gyy, gzz), positivity_tol=0.0)
        except ValueError:
            continue
        c = CorrelatorSet(gz, gxx, gyy, gzz)
        ok &= abs(witness_norm(x.density_matrix()) - xstate_witness_norm(c)) < 1e-12
    return ok


def _classical(rng):
    ok = True
    for n in (2, 3):
        part = Partition.qubits(n)
        m = MeasurementAngles(rng.uniform(0, np.pi, n), rng.uniform(0, 2 * np.pi, n)).to_measurement()
        rho = make_classical_state(part, m, rng.dirichlet(np.ones(part.dim)))
        ok &= witness_norm(rho) < 1e-10
        ok &= classicality_distance(rho, OracleConfig()).value < 1e-8
    ok &= witness_norm(bell_state()) < 1e-14
    return ok


def _solvers(rng):
    ok = True
    for op in (build_xy(XYParams(8, 0.6, 1.3)), build_ashkin_teller(ATParams(4, 1.0, 1.0))):
        e = es.lowest_states(op, 1, seed=1).energies[0]
        ok &= abs(e - es.dense_lowest(op)[0][0]) < 1e-10
    p = XYParams(8, 1.0, 0.7)
    e_even = es.lowest_in_sector(build_xy(p), parity_operators(p), [1], seed=2).energies[0]
    ok &= abs(e_even / 8 - solve_ring(0.7, 1.0, 8).energy_density) < 1e-9
    c = symmetric_correlators(solve_ring(0.0, 0.6, 64))
    ok &= abs(c.G_z - 1) < 1e-12 and abs(c.G_xx) < 1e-12
    return ok


CHECKS: list[tuple[str, Callable]] = [
    ("linalg kernel identities", _linalg),
    ("measurement map idempotence and trace", _measurement),
    ("X-state closed form vs matrix path", _witness),
    ("classical states: zero witness and distance", _classical),
    ("Lanczos vs dense, sector energy vs free fermions", _solvers),
]


def run(seed: int = 0, echo: Callable[[str], None] = print) -> bool:
    rng = np.random.default_rng(seed)
    all_ok = True
    for name, check in CHECKS:
        try:
            ok = bool(check(rng))
        except Exception as exc:  # report, do not abort the suite
            ok = False
            name = f"{name} ({type(exc).__name__}: {exc})"
        echo(f"{'PASS' if ok else 'FAIL'}  {name}")
        all_ok &= ok
    return all_ok
