"""Compiled against pure-Python kernels.

Times the Hermite-function table, one residual evaluation of a fit, and a
full three-family classification with each backend, and checks that the two
backends agree. Run with ``python benchmarks/bench_kernels.py [--repeat R]``.
"""

import argparse
import contextlib
import timeit

import numpy as np

from rabi_bo import _kernels_py, kernels
from rabi_bo import analysis as an
from rabi_bo.bo import solve_bo
from rabi_bo.model import ModelParams

try:
    from rabi_bo import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

NAMES = ("hermite_table", "shape_values", "family_rss")


@contextlib.contextmanager
def backend(mod):
    saved = {k: getattr(kernels, k) for k in NAMES}
    try:
        for k in NAMES:
            setattr(kernels, k, getattr(mod, k))
        yield
    finally:
        for k, v in saved.items():
            setattr(kernels, k, v)


def best(stmt, repeat, number):
    return min(timeit.repeat(stmt, repeat=repeat, number=number)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    mods = [("python", _kernels_py)]
    if _compiled is not None:
        mods.insert(0, ("cython", _compiled))
    else:
        print("compiled extension not available; timing the python backend only")

    x = np.linspace(-30.0, 30.0, 401)
    n = np.arange(200.0)
    p = np.exp(-0.5 * ((n - 40.0) / 9.0) ** 2)
    p /= p.sum()
    spec = solve_bo(ModelParams.from_ratio(10.0, 1.5), n_max=200, n_levels=1)
    pop = an.population_from_bo(spec, 0)

    rows, results = [], {}
    for name, mod in mods:
        t_table = best(lambda: mod.hermite_table(200, x), args.repeat, 20)
        t_rss = best(lambda: mod.family_rss(kernels.GUE, n, p, 0.02, 12.0, 3.0), args.repeat, 2000)
        with backend(mod):
            t_fit = best(lambda: an.classify_population(pop), max(1, args.repeat // 2), 1)
            results[name] = an.classify_population(pop)
        rows.append((name, t_table, t_rss, t_fit))

    print(f"{'backend':<8} {'hermite_table(200x401)':>24} {'family_rss(200 pts)':>20} {'classify':>10}")
    for name, a, b, c in rows:
        print(f"{name:<8} {a * 1e3:>21.3f} ms {b * 1e6:>17.2f} us {c:>8.3f} s")
    if len(rows) == 2:
        (_, a0, b0, c0), (_, a1, b1, c1) = rows
        print(f"{'speedup':<8} {a1 / a0:>22.1f}x {b1 / b0:>19.1f}x {c1 / c0:>9.1f}x")
        t_c = _compiled.hermite_table(200, x)
        t_p = _kernels_py.hermite_table(200, x)
        print(f"max |table difference| = {np.abs(t_c - t_p).max():.2e}")
        fam = {k: v.family for k, v in results.items()}
        print(f"selected family: {fam}")


if __name__ == "__main__":
    main()
