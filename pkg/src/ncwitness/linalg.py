"""Dense complex kernel: Kronecker products, commutators, partial traces, trace norms."""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

MAX_DIM = 1 << 22
HERMITIAN_TOL = 1e-12


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got shape {a.shape}")
    return a


def _require_square(a: np.ndarray, name: str = "matrix") -> None:
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    a = as_matrix(m)
    return a.shape[0] == a.shape[1] and bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol)


def kron(a, b, max_dim: int = MAX_DIM) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    rows, cols = a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
    if max(rows, cols) > max_dim:
        raise DimensionError(f"kron dimension {rows}x{cols} exceeds cap {max_dim}")
    return np.kron(a, b)


def kron_all(mats: Sequence, max_dim: int = MAX_DIM) -> np.ndarray:
    """Left-to-right Kronecker product of a non-empty sequence."""
    if len(mats) == 0:
        raise ValueError("kron_all needs at least one factor")
    return reduce(lambda x, y: kron(x, y, max_dim), [as_matrix(m) for m in mats])


def commutator(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    _require_square(a, "a")
    if a.shape != b.shape:
        raise DimensionError(f"commutator shape mismatch: {a.shape} vs {b.shape}")
    return a @ b - b @ a


def partial_trace(m, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Reduced matrix on the parties in ``keep`` (returned in ascending party order)."""
    a = as_matrix(m)
    dims = [int(d) for d in dims]
    total = int(np.prod(dims))
    if a.shape != (total, total):
        raise DimensionError(f"matrix shape {a.shape} does not match partition {dims}")
    keep = sorted(set(int(k) for k in keep))
    n = len(dims)
    if any(k < 0 or k >= n for k in keep):
        raise IndexError(f"keep set {keep} out of range for {n} parties")
    traced = [i for i in range(n) if i not in keep]
    t = a.reshape(dims + dims)
    perm = keep + traced + [n + i for i in keep] + [n + i for i in traced]
    dk = int(np.prod([dims[i] for i in keep])) if keep else 1
    dt = int(np.prod([dims[i] for i in traced])) if traced else 1
    t = t.transpose(perm).reshape(dk, dt, dk, dt)
    return np.einsum("ajbj->ab", t)


def eigh_hermitian(m) -> Spectrum:
    a = as_matrix(m)
    _require_square(a)
    a = 0.5 * (a + a.conj().T)
    w, v = np.linalg.eigh(a)
    return Spectrum(w[::-1].copy(), v[:, ::-1].copy())


def trace_norm_svd(m) -> float:
    a = as_matrix(m)
    _require_square(a)
    if not np.all(np.isfinite(a)):
        raise ValueError("trace_norm: non-finite entries")
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def trace_norm(m) -> float:
    """Sum of singular values.

    Anti-Hermitian input (the witness commutator) goes through the Hermitian
    eigensolver on ``i*M``; Hermitian input through ``M`` itself; anything else
    falls back to an SVD.
    """
    a = as_matrix(m)
    _require_square(a)
    if not np.all(np.isfinite(a)):
        raise ValueError("trace_norm: non-finite entries")
    if a.size == 0:
        return 0.0
    scale = max(float(np.max(np.abs(a))), 1.0)
    tol = 1e-12 * scale
    if np.max(np.abs(a + a.conj().T)) <= tol:
        h = 1j * a
    elif np.max(np.abs(a - a.conj().T)) <= tol:
        h = a
    else:
        return trace_norm_svd(a)
    h = 0.5 * (h + h.conj().T)
    return float(np.sum(np.abs(np.linalg.eigvalsh(h))))
