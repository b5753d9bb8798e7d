"""Ground states of Pauli-string Hamiltonians.

Restarted Lanczos (full reorthogonalization) is the production solver; the
shifted power method is kept as an alternative. Parity sectors are handled by
applying the projector prod_k (1 + s_k P_k)/2 on every iteration.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .models import PauliStringOperator, total_operator
from .states import DensityMatrix, Partition

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 5000
DEFAULT_KRYLOV = 200
DEGENERACY_TOL = 1e-6


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float = math.nan):
        super().__init__(message)
        self.residual = residual


class EmptySectorError(ValueError):
    pass


class NotDegenerateError(ValueError):
    pass


class SSBNotApplicableError(ValueError):
    pass


class GroundStateKind(str, enum.Enum):
    SYMMETRIC_THERMAL = "symmetric_thermal"
    BROKEN_PLUS = "broken_plus"
    BROKEN_MINUS = "broken_minus"
    RAW_LOWEST = "raw_lowest"


@dataclass
class GroundStateResult:
    energies: np.ndarray
    vectors: list[np.ndarray]
    residuals: np.ndarray
    sector_labels: list[tuple[int, ...]]
    history: list[list[float]] = field(default_factory=list)
    iterations: int = 0


def _random_start(dim: int, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal(dim) + 1j * rng.standard_normal(dim)


def _orthogonalize(w: np.ndarray, basis: Sequence[np.ndarray]) -> np.ndarray:
    for _ in range(2):
        for b in basis:
            w = w - np.vdot(b, w) * b
    return w


def sector_projector(parities: Sequence[PauliStringOperator], signs: Sequence[int]) -> Callable[[np.ndarray], np.ndarray]:
    if len(parities) != len(signs):
        raise ValueError("one sign per parity operator")
    if any(s not in (1, -1) for s in signs):
        raise ValueError("sector signs must be +1 or -1")

    def project(v: np.ndarray) -> np.ndarray:
        for p, s in zip(parities, signs):
            v = 0.5 * (v + s * p.matvec(v))
        return v

    return project


def _start_vector(dim, rng, project, locked, attempts: int = 5) -> np.ndarray:
    for _ in range(attempts):
        v = _random_start(dim, rng)
        if project is not None:
            v = project(v)
        v = _orthogonalize(v, locked)
        nv = np.linalg.norm(v)
        if nv > 1e-10 * math.sqrt(dim):
            return v / nv
    raise EmptySectorError("projection annihilates every trial vector")


def _lanczos_one(apply, dim, rng, tol_abs, locked, project, krylov_dim, budget):
    """Lowest eigenpair of ``apply`` in the complement of ``locked``; returns (E, x, residual, history, iters)."""
    x = _start_vector(dim, rng, project, locked)
    history: list[float] = []
    used = 0
    theta = math.nan
    resid = math.inf
    while used < budget:
        m = min(krylov_dim, budget - used, dim - len(locked))
        V = np.empty((m + 1, dim), dtype=np.complex128)
        V[0] = x
        alphas, betas = [], []
        steps = 0
        for j in range(m):
            w = apply(V[j])
            if locked:
                w = _orthogonalize(w, locked)
            alpha = float(np.vdot(V[j], w).real)
            w = w - alpha * V[j]
            if j > 0:
                w = w - betas[-1] * V[j - 1]
            for _ in range(2):
                w = w - V[: j + 1].T @ (V[: j + 1].conj() @ w)
            beta = float(np.linalg.norm(w))
            alphas.append(alpha)
            steps = j + 1
            used += 1
            if j == 0:
                t_w, t_v = np.array([alpha]), np.array([[1.0]])
            else:
                t_w, t_v = eigh_tridiagonal(np.array(alphas), np.array(betas), select="i", select_range=(0, 0))
            est = beta * abs(t_v[-1, 0])
            if est < 0.1 * tol_abs or beta < 1e-14 * max(1.0, abs(alpha)):
                break
            betas.append(beta)
            V[j + 1] = w / beta
        if steps == 1:
            y = np.array([1.0])
        else:
            _, y = eigh_tridiagonal(np.array(alphas[:steps]), np.array(betas[: steps - 1]), select="i", select_range=(0, 0))
            y = y[:, 0]
        x = V[:steps].T @ y
        x = _orthogonalize(x, locked)
        if project is not None:
            x = project(x)
        x = x / np.linalg.norm(x)
        hx = apply(x)
        theta = float(np.vdot(x, hx).real)
        resid = float(np.linalg.norm(hx - theta * x))
        history.append(theta)
        if resid <= tol_abs:
            return theta, x, resid, history, used
    raise ConvergenceError(f"Lanczos did not converge in {budget} iterations (residual {resid:.3e})", resid)


def _power_one(op, dim, rng, tol_abs, locked, project, budget, shift):
    apply = op.matvec
    x = _start_vector(dim, rng, project, locked)
    history: list[float] = []
    resid = math.inf
    for it in range(1, budget + 1):
        hx = apply(x)
        if it % 10 == 0 or it == budget:
            theta = float(np.vdot(x, hx).real)
            resid = float(np.linalg.norm(hx - theta * x))
            history.append(theta)
            if resid <= tol_abs:
                return theta, x, resid, history, it
        y = shift * x - hx
        if project is not None:
            y = project(y)
        y = _orthogonalize(y, locked)
        x = y / np.linalg.norm(y)
    raise ConvergenceError(f"power method did not converge in {budget} iterations (residual {resid:.3e})", resid)


def _solve(op, k, seed, method, tol, krylov_dim, max_iter, project, label):
    if k < 1 or k > op.dim:
        raise ValueError(f"k={k} outside [1, {op.dim}]")
    rng = np.random.default_rng(seed)
    tol_abs = tol * max(op.norm_bound(), 1.0)
    if project is None:
        apply = op.matvec
    else:
        def apply(v):
            return project(op.matvec(project(v)))
    energies, vectors, residuals, history = [], [], [], []
    total = 0
    for _ in range(k):
        if method == "lanczos":
            e, x, r, h, n = _lanczos_one(apply, op.dim, rng, tol_abs, vectors, project, krylov_dim, max_iter)
        elif method == "power":
            e, x, r, h, n = _power_one(op, op.dim, rng, tol_abs, vectors, project, max_iter, op.norm_bound())
        else:
            raise ValueError(f"unknown method {method!r}")
        energies.append(e)
        vectors.append(x)
        residuals.append(r)
        history.append(h)
        total += n
    order = np.argsort(energies, kind="stable")
    return GroundStateResult(
        np.array(energies)[order],
        [vectors[i] for i in order],
        np.array(residuals)[order],
        [label] * k,
        [history[i] for i in order],
        total,
    )


def lowest_states(
    op: PauliStringOperator,
    k: int = 1,
    seed: int = 0,
    method: str = "lanczos",
    tol: float = DEFAULT_TOL,
    krylov_dim: int = DEFAULT_KRYLOV,
    max_iter: int = DEFAULT_MAX_ITER,
) -> GroundStateResult:
    """The ``k`` lowest eigenpairs, residual ``||Hv - Ev|| <= tol * norm_bound(H)``."""
    return _solve(op, k, seed, method, tol, krylov_dim, max_iter, None, ())


def lowest_in_sector(
    op: PauliStringOperator,
    parities: Sequence[PauliStringOperator],
    signs: Sequence[int],
    seed: int = 0,
    k: int = 1,
    method: str = "lanczos",
    tol: float = DEFAULT_TOL,
    krylov_dim: int = DEFAULT_KRYLOV,
    max_iter: int = DEFAULT_MAX_ITER,
) -> GroundStateResult:
    project = sector_projector(parities, signs)
    res = _solve(op, k, seed, method, tol, krylov_dim, max_iter, project, tuple(int(s) for s in signs))
    for v in res.vectors:
        for p, s in zip(parities, signs):
            if np.linalg.norm(p.matvec(v) - s * v) > 1e-9:
                raise ConvergenceError("sector state drifted out of its parity sector")
    return res


def dense_lowest(op: PauliStringOperator, k: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Dense-diagonalization reference (small systems only)."""
    w, v = np.linalg.eigh(op.to_dense())
    return w[:k], v[:, :k]


def _sector_seed(seed: int, signs: Sequence[int]) -> int:
    return int(seed) * 16 + sum((1 if s < 0 else 0) << i for i, s in enumerate(signs))


def sector_scan(op, parities, seed: int = 0, **kw) -> dict[tuple[int, ...], GroundStateResult]:
    """Lowest state in every joint parity sector."""
    out = {}
    for signs in itertools.product((1, -1), repeat=len(parities)):
        out[signs] = lowest_in_sector(op, parities, signs, seed=_sector_seed(seed, signs), **kw)
    return out


@dataclass
class StateEnsemble:
    """A mixture sum_i w_i |v_i><v_i| of spin-register vectors."""

    weights: np.ndarray
    vectors: list[np.ndarray]
    n_spins: int
    kind: GroundStateKind
    energy: float = math.nan
    sector_gap: float = math.nan
    residual: float = math.nan

    def reduced(self, block: Sequence[int]) -> DensityMatrix:
        block = list(block)
        if len(set(block)) != len(block) or any(b < 0 or b >= self.n_spins for b in block):
            raise IndexError(f"invalid block {block} for {self.n_spins} spins")
        rest = [i for i in range(self.n_spins) if i not in block]
        k = len(block)
        rho = np.zeros((2**k, 2**k), dtype=np.complex128)
        for w, v in zip(self.weights, self.vectors):
            t = v.reshape((2,) * self.n_spins).transpose(block + rest).reshape(2**k, -1)
            rho += w * (t @ t.conj().T)
        rho = 0.5 * (rho + rho.conj().T)
        return DensityMatrix(rho / np.trace(rho).real, Partition.qubits(k))

    def expectation(self, op: PauliStringOperator) -> float:
        return float(sum(w * np.vdot(v, op.matvec(v)).real for w, v in zip(self.weights, self.vectors)))

    def to_density_matrix(self) -> DensityMatrix:
        if self.n_spins > 12:
            raise ValueError("full density matrix limited to 12 spins")
        rho = sum(w * np.outer(v, v.conj()) for w, v in zip(self.weights, self.vectors))
        rho = 0.5 * (rho + rho.conj().T)
        return DensityMatrix(rho, Partition.qubits(self.n_spins))


def _ranked_sectors(scan):
    return sorted(scan.items(), key=lambda kv: kv[1].energies[0])


def symmetric_ground_state(
    op: PauliStringOperator,
    parities: Sequence[PauliStringOperator],
    seed: int = 0,
    degeneracy_tol: float = DEGENERACY_TOL,
    **kw,
) -> StateEnsemble:
    """Equal mixture of the sector ground states degenerate with the overall ground state."""
    ranked = _ranked_sectors(sector_scan(op, parities, seed, **kw))
    e0 = ranked[0][1].energies[0]
    gap = ranked[1][1].energies[0] - e0 if len(ranked) > 1 else math.inf
    cutoff = degeneracy_tol * abs(e0)
    chosen = [res for _, res in ranked if res.energies[0] - e0 < cutoff]
    w = np.full(len(chosen), 1.0 / len(chosen))
    return StateEnsemble(
        w,
        [r.vectors[0] for r in chosen],
        op.n_spins,
        GroundStateKind.SYMMETRIC_THERMAL,
        float(e0),
        float(gap),
        float(max(r.residuals[0] for r in chosen)),
    )


def raw_lowest_state(op: PauliStringOperator, seed: int = 0, **kw) -> StateEnsemble:
    res = lowest_states(op, 1, seed=seed, **kw)
    return StateEnsemble(np.ones(1), [res.vectors[0]], op.n_spins, GroundStateKind.RAW_LOWEST,
                         float(res.energies[0]), math.nan, float(res.residuals[0]))


def _golden_max(f, lo, hi, iters: int = 60) -> float:
    g = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def align_phase(g0: np.ndarray, g1: np.ndarray, order_op: PauliStringOperator, n_scan: int = 64) -> tuple[float, float]:
    """Relative phase chi maximizing |<O>| on (g0 + e^{i chi} g1)/sqrt(2); returns (chi, <O>)."""
    o00 = np.vdot(g0, order_op.matvec(g0)).real
    o11 = np.vdot(g1, order_op.matvec(g1)).real
    o01 = np.vdot(g0, order_op.matvec(g1))

    def value(chi):
        return 0.5 * (o00 + o11) + float((np.exp(1j * chi) * o01).real)

    grid = np.arange(n_scan) * (2 * np.pi / n_scan)
    vals = np.array([abs(value(c)) for c in grid])
    best = grid[int(np.argmax(vals))]
    step = 2 * np.pi / n_scan
    chi = _golden_max(lambda c: abs(value(c)), best - step, best + step)
    if abs(value(chi)) < 1e-10:
        raise SSBNotApplicableError("order parameter vanishes for every relative phase")
    if value(chi) < 0:
        chi += np.pi
    return float(chi % (2 * np.pi)), value(chi)


def broken_ground_state(
    op: PauliStringOperator,
    parity: PauliStringOperator,
    sign: int = 1,
    seed: int = 0,
    degeneracy_tol: float | None = DEGENERACY_TOL,
    order_op: PauliStringOperator | None = None,
    **kw,
) -> StateEnsemble:
    """Superposition (g0 +/- e^{i chi} g1)/sqrt(2) of the even and odd sector ground states.

    ``degeneracy_tol=None`` skips the quasi-degeneracy check.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    ranked = _ranked_sectors(sector_scan(op, [parity], seed, **kw))
    (_, r0), (_, r1) = ranked
    e0, e1 = r0.energies[0], r1.energies[0]
    gap = float(e1 - e0)
    if degeneracy_tol is not None and gap >= degeneracy_tol * abs(e0):
        raise NotDegenerateError(f"sector gap {gap:.3e} exceeds {degeneracy_tol:g} * |E0|")
    g0, g1 = r0.vectors[0], r1.vectors[0]
    if order_op is None:
        order_op = total_operator(op.n_spins, "X").scaled(1.0 / op.n_spins)
    chi, _ = align_phase(g0, g1, order_op)
    psi = (g0 + sign * np.exp(1j * chi) * g1) / np.sqrt(2)
    psi /= np.linalg.norm(psi)
    kind = GroundStateKind.BROKEN_PLUS if sign == 1 else GroundStateKind.BROKEN_MINUS
    return StateEnsemble(np.ones(1), [psi], op.n_spins, kind, float(e0), gap,
                         float(max(r0.residuals[0], r1.residuals[0])))


def ground_state(
    op: PauliStringOperator,
    parities: Sequence[PauliStringOperator],
    kind: GroundStateKind | str,
    seed: int = 0,
    degeneracy_tol: float | None = DEGENERACY_TOL,
    **kw,
) -> StateEnsemble:
    kind = GroundStateKind(kind)
    if kind is GroundStateKind.RAW_LOWEST:
        return raw_lowest_state(op, seed, **kw)
    if kind is GroundStateKind.SYMMETRIC_THERMAL:
        tol = DEGENERACY_TOL if degeneracy_tol is None else degeneracy_tol
        return symmetric_ground_state(op, parities, seed, tol, **kw)
    if len(parities) != 1:
        raise ValueError("broken ground states need exactly one parity operator")
    sign = 1 if kind is GroundStateKind.BROKEN_PLUS else -1
    return broken_ground_state(op, parities[0], sign, seed, degeneracy_tol, **kw)
