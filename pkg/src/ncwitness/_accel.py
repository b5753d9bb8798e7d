"""Hot kernels for Pauli-string matvec, with a numba path and a pure-numpy path.

The numba path is used when numba imports and the environment variable
``NCWITNESS_NUMBA`` is not set to ``0``. Both paths compute the same gather
formulation, so results agree to rounding.
"""

from __future__ import annotations

import os

import numpy as np

_WANT_NUMBA = os.environ.get("NCWITNESS_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off")

try:
    if not _WANT_NUMBA:
        raise ImportError
    import numba
    from numba import njit, prange

    # the bundled TBB is too old for numba; prefer OpenMP, then the builtin queue
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"

# numpy path caches one sign/coefficient diagonal per distinct X-mask when the
# total number of cached entries stays under this cap
_DIAG_CACHE_CAP = 1 << 24


def _popcount_parity_numpy(a: np.ndarray) -> np.ndarray:
    return (np.bitwise_count(a) & 1).astype(np.int8)


def group_terms(xmask: np.ndarray) -> dict[int, list[int]]:
    """Group term indices by X-mask; terms sharing one act as a diagonal times a permutation."""
    groups: dict[int, list[int]] = {}
    for t, x in enumerate(xmask.tolist()):
        groups.setdefault(int(x), []).append(t)
    return groups


def group_diagonal(dim: int, x: int, zmask, coeff, terms) -> np.ndarray:
    """D[a] = sum_t c_t (-1)^popcount((a ^ x) & z_t) for the terms sharing X-mask ``x``."""
    src = np.arange(dim, dtype=np.int64) ^ x
    d = np.zeros(dim, dtype=np.complex128)
    for t in terms:
        sign = 1.0 - 2.0 * _popcount_parity_numpy(src & zmask[t])
        d += coeff[t] * sign
    return d


class NumpyMatvec:
    """Grouped gather matvec in pure numpy."""

    def __init__(self, n_spins: int, xmask, zmask, coeff):
        self.dim = 1 << n_spins
        self.index = np.arange(self.dim, dtype=np.int64)
        self.groups = group_terms(xmask)
        self.zmask = zmask
        self.coeff = coeff
        self._diag = None
        if len(self.groups) * self.dim <= _DIAG_CACHE_CAP:
            self._diag = {
                x: group_diagonal(self.dim, x, zmask, coeff, terms) for x, terms in self.groups.items()
            }

    def __call__(self, v: np.ndarray) -> np.ndarray:
        out = np.zeros(self.dim, dtype=np.complex128)
        for x, terms in self.groups.items():
            d = self._diag[x] if self._diag is not None else group_diagonal(
                self.dim, x, self.zmask, self.coeff, terms
            )
            if x == 0:
                out += d * v
            else:
                out += d * v[self.index ^ x]
        return out


if HAVE_NUMBA:

    @njit(cache=True, inline="always")
    def _parity64(a):
        a ^= a >> 32
        a ^= a >> 16
        a ^= a >> 8
        a ^= a >> 4
        a ^= a >> 2
        a ^= a >> 1
        return a & 1

    @njit(cache=True, parallel=True)
    def _matvec_numba(dre, dim_, xmask, zmask, cre, cim, vre, vim, ore, oim):
        dim = vre.shape[0]
        nt = xmask.shape[0]
        for a in prange(dim):
            ar = dre[a] * vre[a] - dim_[a] * vim[a]
            ai = dre[a] * vim[a] + dim_[a] * vre[a]
            for t in range(nt):
                src = a ^ xmask[t]
                s = 1.0 - 2.0 * _parity64(src & zmask[t])
                ar += s * (cre[t] * vre[src] - cim[t] * vim[src])
                ai += s * (cre[t] * vim[src] + cim[t] * vre[src])
            ore[a] = ar
            oim[a] = ai


class NumbaMatvec:
    """Diagonal group applied once, off-diagonal terms gathered per row in a fixed order."""

    def __init__(self, n_spins: int, xmask, zmask, coeff):
        self.dim = 1 << n_spins
        xmask = np.asarray(xmask, dtype=np.int64)
        zmask = np.asarray(zmask, dtype=np.int64)
        coeff = np.asarray(coeff, dtype=np.complex128)
        diag_terms = np.flatnonzero(xmask == 0)
        off = np.flatnonzero(xmask != 0)
        d = group_diagonal(self.dim, 0, zmask, coeff, diag_terms)
        self.dre = np.ascontiguousarray(d.real)
        self.dim_ = np.ascontiguousarray(d.imag)
        self.xmask = np.ascontiguousarray(xmask[off])
        self.zmask = np.ascontiguousarray(zmask[off])
        self.cre = np.ascontiguousarray(coeff[off].real)
        self.cim = np.ascontiguousarray(coeff[off].imag)

    def __call__(self, v: np.ndarray) -> np.ndarray:
        vre = np.ascontiguousarray(v.real, dtype=np.float64)
        vim = np.ascontiguousarray(v.imag, dtype=np.float64)
        ore = np.empty(self.dim)
        oim = np.empty(self.dim)
        _matvec_numba(self.dre, self.dim_, self.xmask, self.zmask, self.cre, self.cim, vre, vim, ore, oim)
        return ore + 1j * oim


def make_matvec(n_spins: int, xmask, zmask, coeff, backend: str | None = None):
    backend = backend or BACKEND
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is unavailable or disabled")
        return NumbaMatvec(n_spins, xmask, zmask, coeff)
    if backend == "numpy":
        return NumpyMatvec(n_spins, xmask, zmask, coeff)
    raise ValueError(f"unknown backend {backend!r}")
