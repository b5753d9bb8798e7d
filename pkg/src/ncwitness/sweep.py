"""Parameter sweeps, numerical derivatives and classical-point detection.

A sweep evaluates the witness on a block of a chain ground state (or on the
free-fermion pair state) at every point of a uniform grid and writes one CSV
row per point, in grid order, as soon as it is known.
"""

from __future__ import annotations

import concurrent.futures as cf
import logging
import math
import multiprocessing as mp
import os
from dataclasses import dataclass, field, fields, replace
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from . import eigensolver as es
from .models import ATParams, XYParams, build_ashkin_teller, build_xy, parity_operators
from .oracle import MAX_ORACLE_DIM, OracleConfig, classicality_distance
from .witness import CorrelatorSet, witness_norm, xstate_from_correlators
from .xy_fermion import DEFAULT_MODES, solve_ring, symmetric_correlators

log = logging.getLogger(__name__)

MODELS = ("xy_symmetric", "xy_broken", "ashkin_teller")
MODEL_PARAMS = {
    "xy_symmetric": ("lambda", "gamma"),
    "xy_broken": ("lambda", "gamma"),
    "ashkin_teller": ("beta", "delta"),
}
DEFAULT_GRIDS = {
    "lambda": (0.0, 3.0, 301),
    "gamma": (0.0, 1.0, 101),
    "beta": (0.3, 1.7, 141),
    "delta": (0.0, 4.0, 41),
}
DEFAULT_KIND = {
    "xy_symmetric": "symmetric_thermal",
    "xy_broken": "broken_plus",
    "ashkin_teller": "symmetric_thermal",
}
# relative gate on the even/odd splitting for broken states in sweeps; at N=12
# the ordered-phase splitting is ~1e-3 |E0|-scale, far above the solver default
BROKEN_SWEEP_DEGENERACY_TOL = 1e-3

CSV_COLUMNS = ("param", "witness_norm", "oracle_distance", "G_z", "G_xx", "G_yy", "G_zz",
               "energy", "sector_gap", "residual")


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    model: str
    param: str = ""
    start: float | None = None
    stop: float | None = None
    steps: int | None = None
    gamma: float = 0.6
    lam: float = 1.0
    beta: float = 1.0
    delta: float = 3.0
    n_spins: int = 12
    block: str = "pair"
    ground_state: str = ""
    method: str = ""
    n_modes: int = DEFAULT_MODES
    oracle: bool = False
    degeneracy_tol: float | None = None
    pinning_eps: float = 0.0
    seed: int = 0
    out: str | None = field(default=None, compare=False)
    workers: int = field(default=1, compare=False)

    def resolved(self) -> "SweepSpec":
        """Fill model-dependent defaults and validate."""
        if self.model not in MODELS:
            raise SpecError(f"unknown model {self.model!r}; expected one of {MODELS}")
        param = self.param or MODEL_PARAMS[self.model][0]
        if param not in MODEL_PARAMS[self.model]:
            raise SpecError(f"model {self.model} cannot sweep {param!r}")
        start, stop, steps = DEFAULT_GRIDS[param]
        start = start if self.start is None else float(self.start)
        stop = stop if self.stop is None else float(self.stop)
        steps = steps if self.steps is None else int(self.steps)
        if steps < 2:
            raise SpecError("steps must be >= 2")
        if not stop > start:
            raise SpecError("stop must exceed start")
        kind = self.ground_state or DEFAULT_KIND[self.model]
        try:
            kind = es.GroundStateKind(kind).value
        except ValueError:
            raise SpecError(f"unknown ground state kind {kind!r}") from None
        if self.model == "xy_broken" and kind not in ("broken_plus", "broken_minus"):
            raise SpecError("xy_broken needs a broken_plus/broken_minus ground state")
        if self.model != "xy_broken" and kind in ("broken_plus", "broken_minus"):
            raise SpecError("broken ground states are only defined for xy_broken")
        method = self.method or ("fermion" if self.model == "xy_symmetric" else "ed")
        if method not in ("fermion", "ed"):
            raise SpecError(f"unknown method {method!r}")
        if method == "fermion" and self.model != "xy_symmetric":
            raise SpecError("the free-fermion path only covers xy_symmetric")
        tol = self.degeneracy_tol
        if tol is None:
            tol = BROKEN_SWEEP_DEGENERACY_TOL if kind.startswith("broken") else es.DEGENERACY_TOL
        if self.model == "ashkin_teller" and self.n_spins % 2:
            raise SpecError("Ashkin-Teller chains carry an even number of spins")
        if self.n_spins < 2:
            raise SpecError("n_spins must be >= 2")
        if self.workers < 1:
            raise SpecError("workers must be >= 1")
        spec = replace(self, param=param, start=start, stop=stop, steps=steps, ground_state=kind,
                       method=method, degeneracy_tol=float(tol))
        spec.block_indices()
        return spec

    def block_indices(self) -> list[int]:
        b = self.block.strip().lower()
        if b == "pair":
            idx = [0, 1]
        elif b in ("quartet", "octet"):
            if self.model != "ashkin_teller":
                raise SpecError("quartet/octet blocks are only defined for ashkin_teller")
            idx = list(range(4 if b == "quartet" else 8))
        else:
            try:
                idx = [int(t) for t in b.replace(",", " ").split()]
            except ValueError:
                raise SpecError(f"invalid block {self.block!r}") from None
        if self.model == "xy_symmetric" and self.method == "fermion" and idx != [0, 1]:
            raise SpecError("the free-fermion path only provides the nearest-neighbour pair")
        if len(idx) < 2 or len(set(idx)) != len(idx):
            raise SpecError("a block needs at least two distinct spins")
        if any(i < 0 or i >= self.n_spins for i in idx):
            raise SpecError(f"block {idx} outside a chain of {self.n_spins} spins")
        return idx

    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)

    def canonical(self) -> str:
        skip = {"out", "workers", "seed"}
        parts = []
        for f in sorted(fields(self), key=lambda f: f.name):
            if f.name in skip:
                continue
            v = getattr(self, f.name)
            parts.append(f"{f.name}={_fmt_value(v)}")
        return ";".join(parts)

    def header(self) -> str:
        return f"# spec={self.canonical()} seed={self.seed}"


def _fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


@dataclass
class SweepRow:
    param: float
    witness_norm: float
    oracle_distance: float | None = None
    G_z: float | None = None
    G_xx: float | None = None
    G_yy: float | None = None
    G_zz: float | None = None
    energy: float | None = None
    sector_gap: float | None = None
    residual: float | None = None
    error: str | None = None
    convergence_failure: bool = False

    def csv_line(self) -> str:
        return ",".join(fmt_float(getattr(self, c)) for c in CSV_COLUMNS)


def fmt_float(x) -> str:
    if x is None:
        return ""
    return f"{float(x):.17g}"


def _pair_correlators(rho2: np.ndarray) -> CorrelatorSet:
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    y = np.array([[0, -1j], [1j, 0]])
    z = np.diag([1.0, -1.0]).astype(complex)
    i2 = np.eye(2)

    def ev(a, b):
        return float(np.trace(rho2 @ np.kron(a, b)).real)

    gx = 0.5 * (ev(x, i2) + ev(i2, x))
    gxz = 0.5 * (ev(x, z) + ev(z, x))
    return CorrelatorSet(0.5 * (ev(z, i2) + ev(i2, z)), ev(x, x), ev(y, y), ev(z, z), gx, gxz)


def build_model(spec: SweepSpec, value: float):
    """(Hamiltonian, parity operators) at swept value ``value``."""
    p = {spec.param: value}
    if spec.model in ("xy_symmetric", "xy_broken"):
        params = XYParams(spec.n_spins, p.get("gamma", spec.gamma), p.get("lambda", spec.lam), spec.pinning_eps)
        return build_xy(params), parity_operators(params)
    params = ATParams(spec.n_spins // 2, p.get("beta", spec.beta), p.get("delta", spec.delta))
    return build_ashkin_teller(params), parity_operators(params)


def evaluate_point(spec: SweepSpec, value: float) -> SweepRow:
    """Witness and bookkeeping at one grid value; solver failures become NaN rows."""
    value = float(value)
    block = spec.block_indices()
    cfg = OracleConfig(seed=spec.seed)
    if spec.method == "fermion":
        gamma = value if spec.param == "gamma" else spec.gamma
        lam = value if spec.param == "lambda" else spec.lam
        ring = solve_ring(lam, gamma, spec.n_modes)
        c = symmetric_correlators(ring)
        rho = xstate_from_correlators(c).density_matrix()
        dist = classicality_distance(rho, cfg).value if spec.oracle else None
        return SweepRow(value, witness_norm(rho), dist, c.G_z, c.G_xx, c.G_yy, c.G_zz,
                        ring.energy_density, None, None)
    nan = math.nan
    try:
        h, parities = build_model(spec, value)
        ens = es.ground_state(h, parities, spec.ground_state, seed=spec.seed, degeneracy_tol=spec.degeneracy_tol)
    except es.ConvergenceError as exc:
        log.warning("%s=%r: %s", spec.param, value, exc)
        return SweepRow(value, nan, None, nan, nan, nan, nan, nan, nan, exc.residual, str(exc), True)
    except (es.NotDegenerateError, es.SSBNotApplicableError, es.EmptySectorError) as exc:
        log.info("%s=%r: %s", spec.param, value, exc)
        return SweepRow(value, nan, None, nan, nan, nan, nan, nan, nan, nan, str(exc))
    rho = ens.reduced(block)
    c = _pair_correlators(ens.reduced(block[:2]).matrix)
    dist = None
    if spec.oracle and rho.dim <= MAX_ORACLE_DIM:
        dist = classicality_distance(rho, cfg).value
    gap = ens.sector_gap if math.isfinite(ens.sector_gap) else None
    return SweepRow(value, witness_norm(rho), dist, c.G_z, c.G_xx, c.G_yy, c.G_zz, ens.energy, gap, ens.residual)


def _worker_init():
    try:
        import numba

        numba.set_num_threads(1)
    except Exception:  # numba absent or disabled
        pass


def _evaluate_star(args):
    return evaluate_point(*args)


def _completed_params(path: str, header: str) -> list[str] | None:
    """Param fields already written to ``path`` under the same header, or None to start fresh."""
    if not os.path.exists(path):
        return None
    with open(path) as fh:
        text = fh.read()
    lines = text.split("\n")
    if len(lines) < 2 or lines[0] != header or lines[1] != ",".join(CSV_COLUMNS):
        return None
    complete = lines[2:-1] if not text.endswith("\n") else lines[2:]
    return [ln.split(",", 1)[0] for ln in complete if ln]


def run_sweep(spec: SweepSpec, progress: Callable[[SweepRow], None] | None = None) -> list[SweepRow]:
    """Evaluate every grid point; rows are written to ``spec.out`` incrementally when set."""
    spec = spec.resolved()
    grid = spec.grid()
    header = spec.header()
    done: set[str] = set()
    fh = None
    if spec.out:
        prev = _completed_params(spec.out, header)
        if prev is None:
            fh = open(spec.out, "w")
            fh.write(header + "\n" + ",".join(CSV_COLUMNS) + "\n")
        else:
            done = set(prev)
            with open(spec.out) as f:
                text = f.read()
            if not text.endswith("\n"):
                text = text[: text.rfind("\n") + 1]
            fh = open(spec.out, "w")
            fh.write(text)
        fh.flush()
    todo = [v for v in grid if fmt_float(v) not in done]
    rows: list[SweepRow] = []
    try:
        if spec.workers > 1:
            ctx = mp.get_context("spawn")
            with cf.ProcessPoolExecutor(spec.workers, mp_context=ctx, initializer=_worker_init) as ex:
                it = ex.map(_evaluate_star, [(spec, v) for v in todo])
                for row in it:
                    _emit(row, rows, fh, progress)
        else:
            for v in todo:
                _emit(evaluate_point(spec, v), rows, fh, progress)
    finally:
        if fh is not None:
            fh.close()
    return rows


def _emit(row, rows, fh, progress):
    rows.append(row)
    if fh is not None:
        fh.write(row.csv_line() + "\n")
        fh.flush()
    if progress is not None:
        progress(row)


def read_sweep_csv(path: str) -> tuple[str, dict[str, np.ndarray]]:
    """(header line, column arrays); empty fields become NaN."""
    with open(path) as fh:
        header = fh.readline().rstrip("\n")
        cols = fh.readline().strip().split(",")
        data = {c: [] for c in cols}
        for line in fh:
            line = line.strip()
            if not line:
                continue
            for c, tok in zip(cols, line.split(",")):
                data[c].append(float(tok) if tok else math.nan)
    return header, {c: np.array(v, dtype=float) for c, v in data.items()}


def _check_uniform(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two grid points")
    d = np.diff(x)
    h = d.mean()
    if h <= 0 or np.max(np.abs(d - h)) > 1e-9 * max(abs(h), 1.0) + 1e-12:
        raise ValueError("derivative_scan needs a uniform increasing grid")
    return float(h)


def derivative_scan(x: Sequence[float], y: Sequence[float], stencil: str = "central-2") -> np.ndarray:
    """First derivative on a uniform grid; one-sided second-order stencils at the ends."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("x and y lengths differ")
    h = _check_uniform(x)
    n = y.size
    if stencil == "central-2":
        if n < 3:
            return np.full(n, (y[-1] - y[0]) / (x[-1] - x[0]))
        return np.gradient(y, h, edge_order=2)
    if stencil == "central-4":
        if n < 5:
            raise ValueError("central-4 needs at least five points")
        d = np.gradient(y, h, edge_order=2)
        d[2:-2] = (-y[4:] + 8 * y[3:-1] - 8 * y[1:-3] + y[:-4]) / (12 * h)
        return d
    raise ValueError(f"unknown stencil {stencil!r}")


@dataclass
class ClassicalPoint:
    index: int
    param: float
    witness_norm: float
    oracle_distance: float | None = None


def find_classical_points(
    x: Sequence[float],
    w: Sequence[float],
    threshold: float,
    certify: Callable[[float], float] | None = None,
) -> list[ClassicalPoint]:
    """Local minima of the witness at or below ``threshold`` (NaN rows are ignored).

    ``certify`` maps a parameter value to a classicality distance.
    """
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    ok = np.flatnonzero(np.isfinite(w))
    out: list[ClassicalPoint] = []
    prev_taken = None
    for pos, i in enumerate(ok):
        left = w[ok[pos - 1]] if pos > 0 else math.inf
        right = w[ok[pos + 1]] if pos + 1 < len(ok) else math.inf
        if w[i] > threshold or w[i] > left or w[i] > right:
            continue
        if prev_taken is not None and pos > 0 and ok[pos - 1] == prev_taken and w[i] == left:
            prev_taken = i
            continue  # plateau continuation
        out.append(ClassicalPoint(int(i), float(x[i]), float(w[i])))
        prev_taken = i
    if certify is not None:
        for p in out:
            p.oracle_distance = certify(p.param)
    return out


def refine_minimum(f: Callable[[float], float], lo: float, hi: float, xatol: float = 1e-9) -> tuple[float, float]:
    """Bounded scalar minimization of the witness between two grid neighbours."""
    res = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": xatol})
    return float(res.x), float(res.fun)


def witness_at(spec: SweepSpec, value: float) -> float:
    return evaluate_point(spec.resolved(), value).witness_norm


def parse_config(text: str) -> dict[str, str]:
    """Flat ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecError(f"config line {n}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out


_FIELD_ALIASES = {"lambda": "lam", "ground_state_kind": "ground_state"}


def spec_from_mapping(values: dict[str, object]) -> SweepSpec:
    """Build a spec from string or typed values (config file and CLI share this)."""
    kw: dict[str, object] = {}
    names = {f.name: f for f in fields(SweepSpec)}
    for key, raw in values.items():
        key = _FIELD_ALIASES.get(key, key)
        for prefix in ("lambda", "beta", "delta", "gamma"):
            if key in (f"{prefix}_start", f"{prefix}_stop"):
                kw["param"] = prefix
                key = key.split("_", 1)[1]
        if key not in names:
            raise SpecError(f"unknown spec field {key!r}")
        kw[key] = _coerce(key, raw)
    if "model" not in kw:
        raise SpecError("model is required")
    return SweepSpec(**kw)


def _coerce(key: str, raw):
    if raw is None or not isinstance(raw, str):
        return raw
    try:
        if key in ("start", "stop", "gamma", "lam", "beta", "delta", "pinning_eps"):
            return float(raw)
        if key == "degeneracy_tol":
            return None if raw.lower() in ("", "none", "default") else float(raw)
        if key in ("steps", "n_spins", "n_modes", "seed", "workers"):
            return int(raw)
        if key == "oracle":
            return raw.strip().lower() in ("1", "true", "yes", "on")
    except ValueError:
        raise SpecError(f"invalid value {raw!r} for {key}") from None
    return raw
