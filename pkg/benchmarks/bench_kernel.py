"""Compare the compiled and pure-Python integration kernels.

    python benchmarks/bench_kernel.py [--repeat N] [--span T]

Reports right-hand-side evaluations per second and the wall time of one
adaptive integration, and checks both backends give the same final state.
"""

import argparse
import time

import numpy as np

from lambda_engine.dynamics import DensityState, pack_params
from lambda_engine.kernel import get_backend
from lambda_engine.params import EngineParams


def _best(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench(name, y0, par, span, repeat, n_rhs):
    k = get_backend(name)
    t_rhs, _ = _best(lambda: [k.rhs(0.1 * i, y0, par, True) for i in range(n_rhs)], repeat)
    t_int, res = _best(lambda: k.integrate(y0, np.array([0.0, span]), par, True,
                                           1e-10, 1e-10, -1.0, 10_000_000, False), repeat)
    return n_rhs / t_rhs, t_int, res


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--span", type=float, default=20.0)
    ap.add_argument("--rhs-calls", type=int, default=20000)
    args = ap.parse_args()

    p = EngineParams(omega_rabi=20.0, eta=0.5, kappa=1.0)
    par = pack_params(p)
    y0 = DensityState.maximally_mixed().to_vector(p.probe_amplitude)

    rows = {}
    for name in ("cython", "python"):
        try:
            rows[name] = bench(name, y0, par, args.span, args.repeat, args.rhs_calls)
        except ImportError:
            print(f"{name}: backend not available")
    print(f"{'backend':<8} {'rhs/s':>12} {'integrate (s)':>14}")
    for name, (rate, t_int, _) in rows.items():
        print(f"{name:<8} {rate:12.4g} {t_int:14.4g}")
    if len(rows) == 2:
        c, py = rows["cython"], rows["python"]
        y_c, y_p = np.asarray(c[2][0])[-1], np.asarray(py[2][0])[-1]
        print(f"speedup: rhs x{c[0] / py[0]:.1f}, integrate x{py[1] / c[1]:.1f}")
        print(f"max |y_cython - y_python| at t = {args.span:g}: "
              f"{np.max(np.abs(y_c - y_p)):.2e}")


if __name__ == "__main__":
    main()
