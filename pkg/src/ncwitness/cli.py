"""Command-line driver: ``ncwitness {sweep,derivative,classify,oracle,selftest}``."""

from __future__ import annotations

import argparse
import logging
import math
import sys

import numpy as np

from . import sweep as sw
from .eigensolver import ConvergenceError
from .oracle import OracleConfig, classicality_distance
from .stateio import StateFileError, read_state_file
from .witness import witness_norm

EXIT_OK = 0
EXIT_SPEC = 2
EXIT_CONVERGENCE = 3

# flag name -> spec field
_SWEEP_FLAGS = {
    "model": "model", "param": "param", "start": "start", "stop": "stop", "steps": "steps",
    "lambda_start": "lambda_start", "lambda_stop": "lambda_stop",
    "beta_start": "beta_start", "beta_stop": "beta_stop",
    "delta_start": "delta_start", "delta_stop": "delta_stop",
    "gamma": "gamma", "lambda_": "lam", "beta": "beta", "delta": "delta",
    "n_spins": "n_spins", "block": "block", "ground_state": "ground_state", "method": "method",
    "n_modes": "n_modes", "oracle": "oracle", "degeneracy_tol": "degeneracy_tol",
    "pinning_eps": "pinning_eps", "out": "out", "seed": "seed", "workers": "workers",
}


def _add_sweep_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value spec file; flags override its values")
    p.add_argument("--model", choices=sw.MODELS)
    p.add_argument("--param", choices=("lambda", "gamma", "beta", "delta"))
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    for name in ("lambda", "beta", "delta"):
        p.add_argument(f"--{name}-start", type=float, dest=f"{name}_start")
        p.add_argument(f"--{name}-stop", type=float, dest=f"{name}_stop")
    p.add_argument("--steps", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--lambda", type=float, dest="lambda_", help="fixed lambda when sweeping gamma")
    p.add_argument("--beta", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--n-spins", type=int, dest="n_spins")
    p.add_argument("--block", help="pair | quartet | octet | comma-separated spin indices")
    p.add_argument("--ground-state", dest="ground_state",
                   choices=("symmetric_thermal", "broken_plus", "broken_minus", "raw_lowest"))
    p.add_argument("--method", choices=("fermion", "ed"))
    p.add_argument("--n-modes", type=int, dest="n_modes")
    p.add_argument("--oracle", action="store_const", const=True, default=None)
    p.add_argument("--degeneracy-tol", type=float, dest="degeneracy_tol")
    p.add_argument("--pinning-eps", type=float, dest="pinning_eps")
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)


def spec_from_args(args: argparse.Namespace) -> sw.SweepSpec:
    values: dict[str, object] = {}
    if args.config:
        with open(args.config) as fh:
            values.update(sw.parse_config(fh.read()))
    for flag, key in _SWEEP_FLAGS.items():
        v = getattr(args, flag, None)
        if v is not None:
            if key.endswith("_start") or key.endswith("_stop"):
                values.pop(key.split("_", 1)[1], None)
            values[key] = v
    return sw.spec_from_mapping(values)


def cmd_sweep(args) -> int:
    try:
        spec = spec_from_args(args).resolved()
    except (sw.SpecError, OSError) as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    echo = None
    if not spec.out:
        print(spec.header())
        print(",".join(sw.CSV_COLUMNS))
        echo = lambda row: print(row.csv_line(), flush=True)  # noqa: E731
    rows = sw.run_sweep(spec, progress=echo)
    if any(r.convergence_failure for r in rows):
        return EXIT_CONVERGENCE
    return EXIT_OK


def cmd_derivative(args) -> int:
    try:
        _, cols = sw.read_sweep_csv(args.csv)
        d = sw.derivative_scan(cols["param"], cols["witness_norm"], args.stencil)
    except (OSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        out.write("param,witness_norm,derivative\n")
        for x, w, dv in zip(cols["param"], cols["witness_norm"], d):
            out.write(f"{sw.fmt_float(x)},{sw.fmt_float(w)},{sw.fmt_float(dv)}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    if np.any(np.isfinite(d)):
        i = int(np.nanargmin(d))
        print(f"# minimum derivative {d[i]:.6g} at param={cols['param'][i]:.6g}", file=sys.stderr)
    return EXIT_OK


def cmd_classify(args) -> int:
    try:
        _, cols = sw.read_sweep_csv(args.csv)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    pts = sw.find_classical_points(cols["param"], cols["witness_norm"], args.threshold)
    print("param,witness_norm,oracle_distance")
    for p in pts:
        dist = cols.get("oracle_distance", np.full(len(cols["param"]), math.nan))[p.index]
        print(f"{sw.fmt_float(p.param)},{sw.fmt_float(p.witness_norm)},{'' if math.isnan(dist) else sw.fmt_float(dist)}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    try:
        rho = read_state_file(args.state)
        cfg = OracleConfig(args.grid, args.refine_iterations, args.restarts, args.tol, args.seed)
        res = classicality_distance(rho, cfg)
    except (OSError, StateFileError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    print(f"classicality_distance={res.value:.17g}")
    print(f"grid_value={res.grid_value:.17g}")
    print(f"witness_norm={witness_norm(rho):.17g}")
    print("thetas=" + ",".join(f"{t:.12g}" for t in res.angles.thetas))
    print("phis=" + ",".join(f"{p:.12g}" for p in res.angles.phis))
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run

    try:
        ok = run(args.seed)
    except ConvergenceError:
        return EXIT_CONVERGENCE
    return EXIT_OK if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ncwitness", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run a parameter sweep and emit CSV")
    _add_sweep_args(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("derivative", help="finite-difference derivative of a sweep CSV")
    p.add_argument("csv")
    p.add_argument("--stencil", choices=("central-2", "central-4"), default="central-2")
    p.add_argument("--out")
    p.set_defaults(func=cmd_derivative)

    p = sub.add_parser("classify", help="list candidate classical points of a sweep CSV")
    p.add_argument("csv")
    p.add_argument("--threshold", type=float, default=1e-3)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("oracle", help="classicality distance of a state file")
    p.add_argument("state")
    p.add_argument("--grid", type=int, default=24)
    p.add_argument("--refine-iterations", type=int, default=60, dest="refine_iterations")
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("selftest", help="run the built-in invariant checks")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_selftest)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
