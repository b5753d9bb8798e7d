"""Time the Pauli-string matvec on the numba and numpy backends.

    python3 benchmarks/bench_matvec.py [--spins 12 14 16] [--repeat 20]

Prints one line per (model, size, backend) with the mean matvec time, and the
max deviation of the numba result from the numpy one.  Run with
NCWITNESS_NUMBA=0 to confirm the fallback works on its own.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from ncwitness import _accel
from ncwitness.models import ATParams, XYParams, build_ashkin_teller, build_xy


def _time(fn, v, repeat):
    fn(v)  # warm-up, includes JIT compile for numba
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(v)
    return (time.perf_counter() - t0) / repeat


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--spins", type=int, nargs="+", default=[12, 14, 16])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)

    backends = ["numpy"] + (["numba"] if _accel.HAVE_NUMBA else [])
    print(f"default backend: {_accel.BACKEND}")
    print(f"{'model':<14}{'spins':>6}{'terms':>7}  {'backend':<7}{'ms/matvec':>11}{'speedup':>9}{'max|diff|':>11}")
    rng = np.random.default_rng(0)
    for n in args.spins:
        ops = {"xy": build_xy(XYParams(n, 0.6, 1.3))}
        if n % 2 == 0:
            ops["ashkin_teller"] = build_ashkin_teller(ATParams(n // 2, 0.64, 3.0))
        v = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
        for name, op in ops.items():
            ref = None
            base = None
            for b in backends:
                opb = op.with_backend(b)
                dt = _time(opb.matvec, v, args.repeat)
                out = opb.matvec(v)
                if ref is None:
                    ref, base = out, dt
                diff = float(np.max(np.abs(out - ref)))
                print(f"{name:<14}{n:>6}{len(op):>7}  {b:<7}{dt * 1e3:>11.3f}{base / dt:>9.2f}{diff:>11.1e}")
    if not _accel.HAVE_NUMBA:
        print("numba unavailable or disabled; only the numpy path was timed")


if __name__ == "__main__":
    main()
