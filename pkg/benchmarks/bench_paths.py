"""Compare the compiled and NumPy path kernels on identical normals.

Usage::

    python benchmarks/bench_paths.py [--paths 20000] [--steps 2000] [--repeat 3]

Prints the best wall time per kernel and backend, the speedup and the
maximum absolute difference between the two backends' outputs.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from kdvtau import _paths_py, stochastic

try:
    from kdvtau import _paths as _compiled
except ImportError:  # pragma: no cover - extension not built
    _compiled = None


def _best(fn, repeat: int):
    best, out = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _max_diff(a, b) -> float:
    return max(float(np.max(np.abs(np.asarray(x) - np.asarray(y)))) for x, y in zip(a, b))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=20_000)
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)

    p, c, x = np.array([-1.0, 0.5]), np.array([1.0, 0.7]), 1.0
    dt = x / args.steps
    decay, scale = stochastic.ou_coefficients(p, dt)
    z_ou = rng.standard_normal((args.paths, args.steps, p.size))
    z_levy = rng.standard_normal((args.paths // 2, args.steps, 2, 2))

    cases = {
        "ou_quadratic_integral": (lambda m: m.ou_quadratic_integral(z_ou, decay, scale, c, dt)),
        "levy_area": (lambda m: m.levy_area(z_levy, 1.0 / args.steps)),
    }
    print(f"paths={args.paths} steps={args.steps} repeat={args.repeat}")
    print(f"{'kernel':24s} {'numpy [s]':>10s} {'cython [s]':>11s} {'speedup':>8s} {'max |diff|':>11s}")
    for name, call in cases.items():
        t_py, out_py = _best(lambda: call(_paths_py), args.repeat)
        if _compiled is None:
            print(f"{name:24s} {t_py:10.3f} {'n/a':>11s}")
            continue
        t_cy, out_cy = _best(lambda: call(_compiled), args.repeat)
        print(f"{name:24s} {t_py:10.3f} {t_cy:11.3f} {t_py / t_cy:8.2f} {_max_diff(out_py, out_cy):11.1e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
