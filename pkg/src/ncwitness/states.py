"""Density matrices, partitions and local von Neumann measurements.

A local measurement is one orthonormal basis per party; its joint rank-1
projectors are the tensor products of the party projectors, enumerated in
lexicographic (Kronecker) order of the index string ``(i_1, ..., i_N)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .linalg import DimensionError, kron_all, partial_trace, trace_norm

_PAULI = (
    np.array([[0, 1], [1, 0]], dtype=np.complex128),
    np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    np.array([[1, 0], [0, -1]], dtype=np.complex128),
)

DEFAULT_CLASSICAL_TOL = 1e-9


class InvalidStateError(ValueError):
    pass


class PartitionMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class Partition:
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise ValueError("partition needs at least one party")
        if any(d < 2 for d in dims):
            raise ValueError(f"party dimensions must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def qubits(cls, n: int) -> "Partition":
        return cls((2,) * n)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def n_parties(self) -> int:
        return len(self.dims)


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray
    partition: Partition
    validate: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.shape != (self.partition.dim, self.partition.dim):
            raise DimensionError(f"matrix shape {m.shape} does not match partition {self.partition.dims}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if self.validate:
            herm = np.max(np.abs(m - m.conj().T))
            if herm > 1e-12:
                raise InvalidStateError(f"not Hermitian (deviation {herm:.3e})")
            tr = np.trace(m).real
            if abs(tr - 1.0) > 1e-12:
                raise InvalidStateError(f"trace is {tr!r}, expected 1")
            lo = np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0]
            if lo < -1e-10:
                raise InvalidStateError(f"negative eigenvalue {lo:.3e}")

    @classmethod
    def from_pure(cls, psi, partition: Partition) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=np.complex128).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), partition)

    @classmethod
    def maximally_mixed(cls, partition: Partition) -> "DensityMatrix":
        return cls(np.eye(partition.dim) / partition.dim, partition)

    @property
    def dim(self) -> int:
        return self.partition.dim

    def reduced(self, keep: Sequence[int]) -> np.ndarray:
        return partial_trace(self.matrix, self.partition.dims, keep)

    def marginals(self) -> list[np.ndarray]:
        return [self.reduced([k]) for k in range(self.partition.n_parties)]


def bell_state(kind: str = "phi+") -> DensityMatrix:
    s = 1 / np.sqrt(2)
    vecs = {
        "phi+": [s, 0, 0, s],
        "phi-": [s, 0, 0, -s],
        "psi+": [0, s, s, 0],
        "psi-": [0, s, -s, 0],
    }
    return DensityMatrix.from_pure(vecs[kind], Partition.qubits(2))


def ghz_state(n: int) -> DensityMatrix:
    psi = np.zeros(2**n)
    psi[0] = psi[-1] = 1 / np.sqrt(2)
    return DensityMatrix.from_pure(psi, Partition.qubits(n))


def random_density_matrix(partition: Partition, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Ginibre-distributed mixed state."""
    d = partition.dim
    k = d if rank is None else rank
    g = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho / np.trace(rho).real, partition)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def bloch_projectors(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """Projector pair onto +n and -n, n = (sin t cos p, sin t sin p, cos t)."""
    n = (np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta))
    ns = sum(c * s for c, s in zip(n, _PAULI))
    eye = np.eye(2, dtype=np.complex128)
    return 0.5 * (eye + ns), 0.5 * (eye - ns)


def bloch_basis(theta: float, phi: float) -> np.ndarray:
    """Unitary whose columns are the +n and -n eigenvectors."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    e = np.exp(1j * phi)
    return np.array([[c, -s], [e * s, e * c]], dtype=np.complex128)


@dataclass(frozen=True)
class MeasurementAngles:
    thetas: tuple[float, ...]
    phis: tuple[float, ...]

    def __post_init__(self):
        if len(self.thetas) != len(self.phis):
            raise ValueError("thetas and phis must have equal length")
        object.__setattr__(self, "thetas", tuple(float(t) for t in self.thetas))
        object.__setattr__(self, "phis", tuple(float(p) for p in self.phis))

    @classmethod
    def from_vector(cls, x: Sequence[float]) -> "MeasurementAngles":
        x = np.asarray(x, dtype=float)
        return cls(tuple(x[0::2]), tuple(x[1::2]))

    def to_vector(self) -> np.ndarray:
        out = np.empty(2 * len(self.thetas))
        out[0::2] = self.thetas
        out[1::2] = self.phis
        return out

    def canonical(self, atol: float = 1e-12) -> "MeasurementAngles":
        """Fold into theta in [0, pi], phi in [0, 2pi); phi = 0 at the poles."""
        ts, ps = [], []
        for t, p in zip(self.thetas, self.phis):
            # the Bloch direction is what matters; fold via its Cartesian form
            n = np.array([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)])
            t2 = float(np.arccos(np.clip(n[2], -1.0, 1.0)))
            if np.hypot(n[0], n[1]) <= atol:
                p2 = 0.0
            else:
                p2 = float(np.arctan2(n[1], n[0]) % (2 * np.pi))
            ts.append(t2)
            ps.append(p2)
        return MeasurementAngles(tuple(ts), tuple(ps))

    def to_measurement(self) -> "LocalMeasurement":
        return LocalMeasurement.from_bases([bloch_basis(t, p) for t, p in zip(self.thetas, self.phis)])


@dataclass(frozen=True)
class LocalMeasurement:
    """One orthonormal basis per party (columns), i.e. rank-1 projectors |e_i><e_i|."""

    bases: tuple[np.ndarray, ...]

    def __post_init__(self):
        bases = []
        for k, u in enumerate(self.bases):
            u = np.asarray(u, dtype=np.complex128)
            if u.ndim != 2 or u.shape[0] != u.shape[1]:
                raise ValueError(f"party {k}: basis must be a square matrix")
            if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > 1e-12:
                raise ValueError(f"party {k}: basis vectors are not orthonormal")
            u.setflags(write=False)
            bases.append(u)
        object.__setattr__(self, "bases", tuple(bases))

    @classmethod
    def from_bases(cls, bases: Sequence[np.ndarray]) -> "LocalMeasurement":
        return cls(tuple(bases))

    @classmethod
    def from_projectors(cls, projectors: Sequence[Sequence[np.ndarray]]) -> "LocalMeasurement":
        """Build from explicit per-party rank-1 projector lists."""
        bases = []
        for k, plist in enumerate(projectors):
            plist = [np.asarray(p, dtype=np.complex128) for p in plist]
            d = plist[0].shape[0]
            if len(plist) != d:
                raise ValueError(f"party {k}: need {d} rank-1 projectors, got {len(plist)}")
            total = sum(plist)
            if np.max(np.abs(total - np.eye(d))) > 1e-12:
                raise ValueError(f"party {k}: projectors are not complete")
            cols = []
            for p in plist:
                if np.max(np.abs(p @ p - p)) > 1e-12 or np.max(np.abs(p - p.conj().T)) > 1e-12:
                    raise ValueError(f"party {k}: not an orthogonal projector")
                w, v = np.linalg.eigh(p)
                if abs(w[-1] - 1) > 1e-12 or (d > 1 and abs(w[-2]) > 1e-12):
                    raise ValueError(f"party {k}: projector is not rank one")
                cols.append(v[:, -1])
            bases.append(np.column_stack(cols))
        return cls(tuple(bases))

    @classmethod
    def computational(cls, partition: Partition) -> "LocalMeasurement":
        return cls(tuple(np.eye(d, dtype=np.complex128) for d in partition.dims))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(u.shape[0] for u in self.bases)

    def party_projectors(self, k: int) -> list[np.ndarray]:
        u = self.bases[k]
        return [np.outer(u[:, i], u[:, i].conj()) for i in range(u.shape[1])]

    def joint_basis(self) -> np.ndarray:
        return kron_all(self.bases)

    def joint_projectors(self) -> Iterator[tuple[tuple[int, ...], np.ndarray]]:
        per_party = [self.party_projectors(k) for k in range(len(self.bases))]
        for idx in itertools.product(*(range(len(p)) for p in per_party)):
            yield idx, kron_all([per_party[k][i] for k, i in enumerate(idx)])


def _check_match(rho: DensityMatrix, m: LocalMeasurement) -> None:
    if m.dims != rho.partition.dims:
        raise PartitionMismatchError(f"measurement dims {m.dims} do not match partition {rho.partition.dims}")


def dephase(matrix: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Keep only the diagonal of ``matrix`` in the orthonormal ``basis``."""
    diag = np.einsum("ji,jk,ki->i", basis.conj(), matrix, basis)
    return (basis * diag) @ basis.conj().T


def apply_measurement(rho: DensityMatrix, m: LocalMeasurement) -> DensityMatrix:
    """Non-selective local measurement: sum_j P_j rho P_j."""
    _check_match(rho, m)
    out = dephase(rho.matrix, m.joint_basis())
    out = 0.5 * (out + out.conj().T)
    return DensityMatrix(out, rho.partition, validate=False)


def make_classical_state(partition: Partition, m: LocalMeasurement, probs) -> DensityMatrix:
    """sum_j p_j P_j, with j running over index strings in Kronecker order."""
    if m.dims != partition.dims:
        raise PartitionMismatchError(f"measurement dims {m.dims} do not match partition {partition.dims}")
    p = np.asarray(probs, dtype=float).ravel()
    if p.size != partition.dim:
        raise ValueError(f"need {partition.dim} probabilities, got {p.size}")
    if np.any(p < 0):
        raise ValueError("probabilities must be nonnegative")
    if abs(p.sum() - 1.0) > 1e-12:
        raise ValueError(f"probabilities sum to {p.sum()!r}, expected 1")
    u = m.joint_basis()
    rho = (u * p) @ u.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho, partition)


def disturbance(rho: DensityMatrix, m: LocalMeasurement) -> float:
    """Trace distance ||rho - Phi(rho)||_1."""
    return trace_norm(rho.matrix - apply_measurement(rho, m).matrix)


def max_projector_commutator(rho: DensityMatrix, m: LocalMeasurement) -> float:
    _check_match(rho, m)
    return max(trace_norm(rho.matrix @ p - p @ rho.matrix) for _, p in m.joint_projectors())


def is_classical_under(rho: DensityMatrix, m: LocalMeasurement, tol: float = DEFAULT_CLASSICAL_TOL) -> bool:
    return disturbance(rho, m) <= tol
