"""Free-fermion solution of the periodic XY chain at zero temperature.

After the Jordan-Wigner map, each momentum pair (k, -k) is a 2x2 Bogoliubov
problem with dispersion

    omega(k) = sqrt((1 + lam cos k)^2 + (gamma lam sin k)^2)

in units of the field. The even-fermion-parity sector of an ``n``-site ring uses
antiperiodic momenta k = (2m + 1) pi / n, and every spin correlator needed
here follows from the contraction

    G(r) = (1/n) sum_k [cos(k r)(1 + lam cos k) - gamma lam sin(k r) sin k] / omega(k)

via Wick's theorem: <sz> = G(0), <sx sx> = G(-1), <sy sy> = G(1),
<sz sz> = G(0)^2 - G(1) G(-1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .witness import CorrelatorSet, xstate_witness_norm

DEFAULT_MODES = 2048


@dataclass(frozen=True)
class FermionRing:
    n_modes: int
    lam: float
    gamma: float
    momenta: np.ndarray
    dispersion: np.ndarray
    # cos/sin of the Bogoliubov angle per momentum
    cos2: np.ndarray
    sin2: np.ndarray

    @property
    def energy_density(self) -> float:
        """Ground-state energy per site (units of h)."""
        return float(-np.mean(self.dispersion))


@dataclass(frozen=True)
class FermionCorrelators:
    r: np.ndarray
    G: np.ndarray

    def __call__(self, r: int) -> float:
        return float(self.G[int(np.nonzero(self.r == r)[0][0])])


def solve_ring(lam: float, gamma: float, n_modes: int = DEFAULT_MODES) -> FermionRing:
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    if not 0 <= gamma <= 1:
        raise ValueError("gamma must lie in [0, 1]")
    if n_modes < 2 or n_modes % 2:
        raise ValueError("n_modes must be a positive even number")
    k = (2 * np.arange(n_modes) + 1) * np.pi / n_modes
    re = 1 + lam * np.cos(k)
    im = gamma * lam * np.sin(k)
    omega = np.hypot(re, im)
    # gapless points (gamma = 0, lam >= 1, or lam = 1 at k = pi) can hit omega = 0
    # exactly only if a momentum sits on the node; fill such modes as part of the sea
    safe = np.where(omega > 0, omega, 1.0)
    cos2 = np.where(omega > 0, re / safe, 1.0)
    sin2 = np.where(omega > 0, im / safe, 0.0)
    return FermionRing(n_modes, float(lam), float(gamma), k, omega, cos2, sin2)


def contractions(ring: FermionRing, r_max: int = 2) -> FermionCorrelators:
    r = np.arange(-r_max, r_max + 1)
    k = ring.momenta
    kr = np.outer(r, k)
    G = (np.cos(kr) * ring.cos2 - np.sin(kr) * ring.sin2).mean(axis=1)
    return FermionCorrelators(r, G)


def symmetric_correlators(ring: FermionRing) -> CorrelatorSet:
    c = contractions(ring, 1)
    g0, g1, gm1 = c(0), c(1), c(-1)
    return CorrelatorSet(G_z=g0, G_xx=gm1, G_yy=g1, G_zz=g0 * g0 - g1 * gm1)


def factorization_point(gamma: float) -> float:
    """lam_f with gamma^2 + 1/lam_f^2 = 1; infinite for gamma = 1."""
    if not 0 < gamma <= 1:
        raise ValueError("factorization point needs 0 < gamma <= 1")
    if gamma == 1:
        return math.inf
    return 1.0 / math.sqrt(1.0 - gamma * gamma)


def symmetric_witness_curve(gamma: float, lambdas, n_modes: int = DEFAULT_MODES) -> tuple[np.ndarray, np.ndarray]:
    lambdas = np.asarray(lambdas, dtype=float)
    if np.any(lambdas < 0):
        raise ValueError("lambda grid must be >= 0")
    w = np.array([xstate_witness_norm(symmetric_correlators(solve_ring(l, gamma, n_modes))) for l in lambdas])
    return lambdas, w
