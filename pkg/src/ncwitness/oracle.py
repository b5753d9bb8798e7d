"""Brute-force classicality distance: min over local qubit bases of ||rho - Phi(rho)||_1.

Search protocol: seed bases from the marginal eigenvectors, coordinate-wise
coarse grid scans over each party's Bloch angles, then Nelder-Mead refinement
from the best points and from random restarts. The result is an upper bound on
the true minimum; the best grid value is reported alongside it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .linalg import kron_all
from .states import DensityMatrix, MeasurementAngles, bloch_basis, dephase
from .witness import witness_norm

MAX_ORACLE_DIM = 1 << 8


@dataclass(frozen=True)
class OracleConfig:
    coarse_grid: int = 24
    refine_iterations: int = 60
    restarts: int = 8
    tol: float = 1e-8
    seed: int = 0
    coarse_cycles: int = 2

    def __post_init__(self):
        for name in ("coarse_grid", "refine_iterations", "restarts", "coarse_cycles"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True)
class OracleResult:
    value: float
    angles: MeasurementAngles
    grid_value: float
    evaluations: int


def _objective(rho: np.ndarray, n: int):
    def f(x: np.ndarray) -> float:
        u = kron_all([bloch_basis(x[2 * k], x[2 * k + 1]) for k in range(n)])
        diff = rho - dephase(rho, u)
        diff = 0.5 * (diff + diff.conj().T)
        return float(np.sum(np.abs(np.linalg.eigvalsh(diff))))

    return f


def _marginal_seed(rho: DensityMatrix) -> np.ndarray:
    x = []
    for m in rho.marginals():
        _, v = np.linalg.eigh(m)
        top = v[:, -1]
        # Bloch direction of the leading eigenvector
        a, b = top
        theta = 2 * np.arctan2(abs(b), abs(a))
        phi = np.angle(b) - np.angle(a) if abs(a) > 0 and abs(b) > 0 else 0.0
        x.extend([theta, phi])
    return np.array(x)


def classicality_distance(rho: DensityMatrix, cfg: OracleConfig | None = None) -> OracleResult:
    cfg = cfg or OracleConfig()
    if any(d != 2 for d in rho.partition.dims):
        raise ValueError("the oracle parameterizes qubit parties only")
    if rho.dim > MAX_ORACLE_DIM:
        raise ValueError(f"state dimension {rho.dim} exceeds oracle cap {MAX_ORACLE_DIM}")
    n = rho.partition.n_parties
    f = _objective(rho.matrix, n)
    evals = 0
    early = 1e-2 * cfg.tol

    def F(x):
        nonlocal evals
        evals += 1
        return f(x)

    x_best = _marginal_seed(rho)
    f_best = F(x_best)
    grid_best = np.inf
    candidates = [(f_best, x_best.copy())]

    if f_best > early:
        thetas = (np.arange(cfg.coarse_grid) + 0.5) * np.pi / cfg.coarse_grid
        phis = np.arange(cfg.coarse_grid) * 2 * np.pi / cfg.coarse_grid
        x = x_best.copy()
        for _ in range(cfg.coarse_cycles):
            for k in range(n):
                for t in thetas:
                    for p in phis:
                        trial = x.copy()
                        trial[2 * k], trial[2 * k + 1] = t, p
                        v = F(trial)
                        grid_best = min(grid_best, v)
                        if v < f_best:
                            f_best, x_best = v, trial
                x = x_best.copy()
        candidates.append((f_best, x_best.copy()))

    rng = np.random.default_rng(cfg.seed)
    starts = [c[1] for c in sorted(candidates, key=lambda c: c[0])[:2]]
    starts += [np.column_stack([np.arccos(rng.uniform(-1, 1, n)), rng.uniform(0, 2 * np.pi, n)]).ravel()
               for _ in range(cfg.restarts)]
    maxiter = cfg.refine_iterations * 2 * n * 4
    for x0 in starts:
        if f_best <= early:
            break
        res = minimize(F, x0, method="Nelder-Mead",
                       options={"maxiter": maxiter, "xatol": 1e-12, "fatol": 1e-14, "adaptive": True})
        if res.fun < f_best:
            f_best, x_best = float(res.fun), res.x
    angles = MeasurementAngles.from_vector(x_best).canonical()
    return OracleResult(float(f_best), angles, float(grid_best), evals)


@dataclass(frozen=True)
class SufficiencyReport:
    witness_norm: float
    distance: float
    implication_holds: bool


def certify_witness_sufficiency(rho: DensityMatrix, cfg: OracleConfig | None = None) -> SufficiencyReport:
    """Check that a witness above 10*tol comes with a distance above tol."""
    cfg = cfg or OracleConfig()
    w = witness_norm(rho)
    d = classicality_distance(rho, cfg).value
    return SufficiencyReport(w, d, (w <= 10 * cfg.tol) or (d > cfg.tol))
