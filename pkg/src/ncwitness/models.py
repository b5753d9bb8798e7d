"""Pauli-string operators and the spin-chain Hamiltonians built from them.

Site ``i`` of an ``n``-spin register is bit ``n - 1 - i`` of the basis index,
so dense matrices follow ``kron(site_0, site_1, ...)`` ordering and bit value
0 is spin up (sigma^z = +1).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sps

from . import _accel

_LABELS = "IXYZ"
_DENSE = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


@dataclass(frozen=True)
class PauliString:
    coefficient: float
    labels: str

    def __post_init__(self):
        labels = self.labels.upper()
        if any(ch not in _LABELS for ch in labels):
            raise ValueError(f"invalid Pauli labels {self.labels!r}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "coefficient", float(self.coefficient))

    @classmethod
    def from_sites(cls, coefficient: float, n_spins: int, ops: dict[int, str]) -> "PauliString":
        labels = ["I"] * n_spins
        for site, lab in ops.items():
            labels[site % n_spins] = lab
        return cls(coefficient, "".join(labels))

    @property
    def n_spins(self) -> int:
        return len(self.labels)

    def masks(self) -> tuple[int, int, int]:
        """(x_mask, z_mask, number of Y factors); Y = i X Z."""
        n = self.n_spins
        x = z = ny = 0
        for site, lab in enumerate(self.labels):
            bit = 1 << (n - 1 - site)
            if lab in "XY":
                x |= bit
            if lab in "ZY":
                z |= bit
            if lab == "Y":
                ny += 1
        return x, z, ny

    def dense(self) -> np.ndarray:
        out = np.array([[self.coefficient]], dtype=np.complex128)
        for lab in self.labels:
            out = np.kron(out, _DENSE[lab])
        return out


class PauliStringOperator:
    """Real-weighted sum of Pauli strings, applied without materializing a matrix."""

    def __init__(self, terms: Iterable[PauliString], n_spins: int, backend: str | None = None):
        self.terms = tuple(terms)
        self.n_spins = int(n_spins)
        if any(t.n_spins != self.n_spins for t in self.terms):
            raise ValueError("all Pauli strings must act on n_spins sites")
        self.backend = backend or _accel.BACKEND
        x, z, c = [], [], []
        for t in self.terms:
            xm, zm, ny = t.masks()
            x.append(xm)
            z.append(zm)
            c.append(t.coefficient * (1j**ny))
        self.xmask = np.array(x, dtype=np.int64)
        self.zmask = np.array(z, dtype=np.int64)
        self.coeff = np.array(c, dtype=np.complex128)

    @property
    def dim(self) -> int:
        return 1 << self.n_spins

    def __len__(self) -> int:
        return len(self.terms)

    def __add__(self, other: "PauliStringOperator") -> "PauliStringOperator":
        if other.n_spins != self.n_spins:
            raise ValueError("operand sizes differ")
        return PauliStringOperator(self.terms + other.terms, self.n_spins, self.backend)

    def scaled(self, s: float) -> "PauliStringOperator":
        return PauliStringOperator(
            [PauliString(s * t.coefficient, t.labels) for t in self.terms], self.n_spins, self.backend
        )

    def with_backend(self, backend: str) -> "PauliStringOperator":
        return PauliStringOperator(self.terms, self.n_spins, backend)

    @cached_property
    def _kernel(self):
        return _accel.make_matvec(self.n_spins, self.xmask, self.zmask, self.coeff, self.backend)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.complex128)
        if v.shape != (self.dim,):
            raise ValueError(f"vector length {v.shape} does not match dimension {self.dim}")
        if not self.terms:
            return np.zeros(self.dim, dtype=np.complex128)
        return self._kernel(v)

    __call__ = matvec

    def norm_bound(self) -> float:
        """Upper bound on the spectral norm (sum of |coefficients|)."""
        return float(np.sum(np.abs(self.coeff)))

    def expectation(self, psi: np.ndarray) -> complex:
        return complex(np.vdot(psi, self.matvec(psi)))

    def to_sparse(self) -> sps.csr_matrix:
        dim = self.dim
        cols = np.arange(dim, dtype=np.int64)
        rows_all, cols_all, data_all = [], [], []
        for x, z, c in zip(self.xmask, self.zmask, self.coeff):
            sign = 1.0 - 2.0 * (np.bitwise_count(cols & z) & 1)
            rows_all.append(cols ^ x)
            cols_all.append(cols)
            data_all.append(c * sign)
        if not rows_all:
            return sps.csr_matrix((dim, dim), dtype=np.complex128)
        m = sps.coo_matrix(
            (np.concatenate(data_all), (np.concatenate(rows_all), np.concatenate(cols_all))),
            shape=(dim, dim),
        )
        return m.tocsr()

    def to_dense(self) -> np.ndarray:
        if self.n_spins > 14:
            raise ValueError("dense construction limited to 14 spins")
        out = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for t in self.terms:
            out += t.dense()
        return out


def pauli_sum(n_spins: int, items: Iterable[tuple[float, dict[int, str]]], backend: str | None = None) -> PauliStringOperator:
    return PauliStringOperator(
        [PauliString.from_sites(c, n_spins, ops) for c, ops in items], n_spins, backend
    )


def site_operator(n_spins: int, site: int, label: str, coefficient: float = 1.0) -> PauliStringOperator:
    return pauli_sum(n_spins, [(coefficient, {site: label})])


def total_operator(n_spins: int, label: str, sites: Sequence[int] | None = None) -> PauliStringOperator:
    sites = range(n_spins) if sites is None else sites
    return pauli_sum(n_spins, [(1.0, {i: label}) for i in sites])


@dataclass(frozen=True)
class XYParams:
    n_spins: int
    gamma: float
    lam: float
    pinning_eps: float = 0.0

    def __post_init__(self):
        if self.n_spins < 2:
            raise ValueError("XY chain needs at least 2 spins")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")
        if self.pinning_eps < 0:
            raise ValueError("pinning field must be >= 0")


@dataclass(frozen=True)
class ATParams:
    n_sites: int
    beta: float
    delta: float
    J: float = 1.0

    def __post_init__(self):
        if self.n_sites < 2:
            raise ValueError("Ashkin-Teller chain needs at least 2 sites")
        if self.beta <= 0:
            raise ValueError("beta must be > 0")

    @property
    def n_spins(self) -> int:
        return 2 * self.n_sites


def build_xy(params: XYParams, backend: str | None = None) -> PauliStringOperator:
    """Periodic XY chain in units of h: bonds -(lam/2)[(1+g)XX + (1-g)YY], field -Z, pinning -eps X."""
    n, g, lam = params.n_spins, params.gamma, params.lam
    items = []
    for i in range(n):
        j = (i + 1) % n
        items.append((-0.5 * lam * (1 + g), {i: "X", j: "X"}))
        items.append((-0.5 * lam * (1 - g), {i: "Y", j: "Y"}))
        items.append((-1.0, {i: "Z"}))
    if params.pinning_eps > 0:
        items.extend((-params.pinning_eps, {i: "X"}) for i in range(n))
    return pauli_sum(n, items, backend)


def at_sigma(j: int, n_sites: int) -> int:
    return 2 * (j % n_sites)


def at_tau(j: int, n_sites: int) -> int:
    return 2 * (j % n_sites) + 1


def build_ashkin_teller(params: ATParams, backend: str | None = None) -> PauliStringOperator:
    """Periodic quantum Ashkin-Teller chain, spins interleaved as sigma_0 tau_0 sigma_1 tau_1 ..."""
    m, J, b, D = params.n_sites, params.J, params.beta, params.delta
    n = 2 * m
    items = []
    for j in range(m):
        s, t = at_sigma(j, m), at_tau(j, m)
        items.append((-J, {s: "X"}))
        items.append((-J, {t: "X"}))
        items.append((-J * D, {s: "X", t: "X"}))
    for j in range(m):
        s, t = at_sigma(j, m), at_tau(j, m)
        s1, t1 = at_sigma(j + 1, m), at_tau(j + 1, m)
        items.append((-J * b, {s: "Z", s1: "Z"}))
        items.append((-J * b, {t: "Z", t1: "Z"}))
        items.append((-J * b * D, {s: "Z", s1: "Z", t: "Z", t1: "Z"}))
    return pauli_sum(n, items, backend)


def parity_operators(params: XYParams | ATParams, backend: str | None = None) -> tuple[PauliStringOperator, ...]:
    """Z2 generators: prod sigma^z for XY; prod sigma^x and prod tau^x for Ashkin-Teller."""
    if isinstance(params, XYParams):
        n = params.n_spins
        return (pauli_sum(n, [(1.0, {i: "Z" for i in range(n)})], backend),)
    if isinstance(params, ATParams):
        m, n = params.n_sites, params.n_spins
        p1 = pauli_sum(n, [(1.0, {at_sigma(j, m): "X" for j in range(m)})], backend)
        p2 = pauli_sum(n, [(1.0, {at_tau(j, m): "X" for j in range(m)})], backend)
        return (p1, p2)
    raise TypeError(f"unsupported params type {type(params).__name__}")
