"""The nonclassicality witness ||[rho, rho_A1 x ... x rho_AN]||_1.

Besides the general matrix path there is the closed form for translation
invariant Z2-symmetric two-qubit states (X-states), written in terms of the
magnetization and nearest-neighbour correlators.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import commutator, kron_all, trace_norm
from .states import (
    DEFAULT_CLASSICAL_TOL,
    DensityMatrix,
    InvalidStateError,
    LocalMeasurement,
    Partition,
    disturbance,
)

POSITIVITY_TOL = 1e-9


def marginal_product(rho: DensityMatrix) -> np.ndarray:
    return kron_all(rho.marginals())


def witness_operator(rho: DensityMatrix) -> np.ndarray:
    if rho.partition.n_parties < 2:
        raise ValueError("the witness needs a partition with at least two parties")
    return commutator(rho.matrix, marginal_product(rho))


def witness_norm(rho: DensityMatrix) -> float:
    return trace_norm(witness_operator(rho))


@dataclass(frozen=True)
class CorrelatorSet:
    """Single-site and nearest-neighbour spin expectation values.

    G_x and G_xz are only nonzero for symmetry-broken states.
    """

    G_z: float
    G_xx: float
    G_yy: float
    G_zz: float
    G_x: float = 0.0
    G_xz: float = 0.0

    def __post_init__(self):
        for name in ("G_z", "G_xx", "G_yy", "G_zz", "G_x", "G_xz"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or abs(v) > 1 + 1e-12:
                raise ValueError(f"{name}={v!r} outside [-1, 1]")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class XStateParams:
    a: float
    b1: float
    b2: float
    d: float
    z: float
    f: float

    def __post_init__(self):
        a, b1, b2, d, z, f = (self.a, self.b1, self.b2, self.d, self.z, self.f)
        if abs(a + b1 + b2 + d - 1) > 1e-12:
            raise InvalidStateError("X-state diagonal does not sum to 1")
        if min(a, b1, b2, d) < 0:
            raise InvalidStateError("X-state has a negative population")
        if abs(z) > np.sqrt(b1 * b2) + 1e-12 or abs(f) > np.sqrt(a * d) + 1e-12:
            raise InvalidStateError("X-state coherences violate positivity")

    def matrix(self) -> np.ndarray:
        a, b1, b2, d, z, f = (self.a, self.b1, self.b2, self.d, self.z, self.f)
        return np.array(
            [[a, 0, 0, f], [0, b1, z, 0], [0, z, b2, 0], [f, 0, 0, d]],
            dtype=np.complex128,
        )

    def density_matrix(self) -> DensityMatrix:
        return DensityMatrix(self.matrix(), Partition.qubits(2))


def _clip_block(p: float, q: float, c: float, tol: float) -> tuple[float, float, float]:
    """Project the real symmetric block [[p, c], [c, q]] onto the PSD cone if it is within ``tol``."""
    w, v = np.linalg.eigh(np.array([[p, c], [c, q]]))
    if w[0] < -tol:
        raise InvalidStateError(f"correlators give a negative eigenvalue {w[0]:.3e}")
    if w[0] >= 0:
        return p, q, c
    w = np.clip(w, 0.0, None)
    m = (v * w) @ v.T
    return float(m[0, 0]), float(m[1, 1]), float(m[0, 1])


def xstate_from_correlators(c: CorrelatorSet, positivity_tol: float = POSITIVITY_TOL) -> XStateParams:
    """Two-site X-state entries from the translation-invariant correlators."""
    gz, gzz = c.G_z, c.G_zz
    a = 0.25 * (1 + 2 * gz + gzz)
    b = 0.25 * (1 - gzz)
    d = 0.25 * (1 - 2 * gz + gzz)
    z = 0.25 * (c.G_xx + c.G_yy)
    f = 0.25 * (c.G_xx - c.G_yy)
    a, d, f = _clip_block(a, d, f, positivity_tol)
    b1, b2, z = _clip_block(b, b, z, positivity_tol)
    total = a + b1 + b2 + d
    return XStateParams(a / total, b1 / total, b2 / total, d / total, z / total, f / total)


def xstate_commutator_corner(x: XStateParams) -> float:
    """k = f[(b + d)^2 - (a + b)^2], the single independent entry of the X-state witness (b1 = b2 = b)."""
    b = 0.5 * (x.b1 + x.b2)
    return x.f * ((b + x.d) ** 2 - (x.a + b) ** 2)


def xstate_witness_norm(c: CorrelatorSet) -> float:
    return 0.5 * abs(c.G_xx - c.G_yy) * abs(c.G_z)


def ssb_pair_matrix(c: CorrelatorSet, positivity_tol: float = POSITIVITY_TOL) -> np.ndarray:
    """Two-site reduced matrix of a symmetry-broken state.

    The X-state gains the entries p = (G_x + G_xz)/4 and q = (G_x - G_xz)/4
    (normalized so the trace stays 1).
    """
    x = xstate_from_correlators(CorrelatorSet(c.G_z, c.G_xx, c.G_yy, c.G_zz), positivity_tol)
    b = 0.5 * (x.b1 + x.b2)
    p = 0.25 * (c.G_x + c.G_xz)
    q = 0.25 * (c.G_x - c.G_xz)
    m = np.array(
        [[x.a, p, p, x.f], [p, b, x.z, q], [p, x.z, b, q], [x.f, q, q, x.d]],
        dtype=np.complex128,
    )
    lo = np.linalg.eigvalsh(m)[0]
    if lo < -positivity_tol:
        raise InvalidStateError(f"SSB correlators give a negative eigenvalue {lo:.3e}")
    return m


@dataclass(frozen=True)
class ClassicalityFlags:
    zero_magnetization: bool
    xy_isotropy: bool

    @property
    def classical_allowed(self) -> bool:
        """Either necessary condition holding leaves classicality possible."""
        return self.zero_magnetization or self.xy_isotropy


def classicality_conditions(c: CorrelatorSet, tol: float = DEFAULT_CLASSICAL_TOL) -> ClassicalityFlags:
    return ClassicalityFlags(abs(c.G_z) <= tol, abs(c.G_xx - c.G_yy) <= tol)


@dataclass(frozen=True)
class Theorem2Report:
    disturbance: float
    witness_norm: float
    classical: bool
    witness_zero: bool

    @property
    def implication_holds(self) -> bool:
        return (not self.classical) or self.witness_zero


def check_theorem2(rho: DensityMatrix, m: LocalMeasurement, tol: float = 1e-10) -> Theorem2Report:
    """Classical under ``m`` must imply a vanishing witness."""
    dist = disturbance(rho, m)
    w = witness_norm(rho)
    return Theorem2Report(dist, w, dist <= tol, w <= tol)
