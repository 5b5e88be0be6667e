"""Compiled vs numpy kernels, side by side.

    python3 benchmarks/bench_kernels.py [--n 20] [--repeat 5]

Both variants are called directly (the env flag only decides which one the
package uses by default), outputs are compared for equality, and the best of
``--repeat`` runs is reported. The first compiled call is a warm-up and is
not timed.
"""
import argparse
import time

import numpy as np

from pdtlab import kernels
from pdtlab._accel import USE_NUMBA
from pdtlab.core import Coset, build_named
from pdtlab.pdt import materialize
from pdtlab.strategies import maj_strategy


def best_of(fn, make_args, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        args = make_args()
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def same(a, b):
    if isinstance(a, tuple):
        return all(np.array_equal(x, y) for x, y in zip(a, b))
    return np.array_equal(a, b)


def cases(n):
    rng = np.random.default_rng(7)
    table = rng.integers(0, 2, 1 << n, dtype=np.uint8)
    signs = (1 - 2 * table.astype(np.int64))
    tree = materialize(maj_strategy(min(n, 14)), min(n, 14))
    c = Coset.full(n)
    for _ in range(n // 3):
        r = c.insert(int(rng.integers(1, 1 << n)), int(rng.integers(0, 2)))
        if isinstance(r, Coset):
            c = r
    p = c.parametrization()
    arrs = [np.array(v, dtype=np.int64) for v in (p.free, p.pivots, p.rows, p.rhs)]
    xs = rng.integers(0, 1 << 27, 1 << min(n, 20), dtype=np.int64)
    return {
        "fwht": (lambda: (signs.copy(),), f"2^{n} int64"),
        "mobius": (lambda: (table.copy(),), f"2^{n} uint8"),
        "restrict_parity": (lambda: (table, 0b1011011, 1), f"2^{n} -> 2^{n - 1}"),
        "tree_eval_all": (
            lambda: (tree.masks, tree.child0, tree.child1, tree.labels, tree.n),
            f"maj:{tree.n} tree, {tree.size} nodes",
        ),
        "coset_points": (lambda: tuple(arrs), f"dim {c.dim} of {n}"),
        "rmaj_bits": (lambda: (xs, 3), f"{xs.size} points, 27 vars"),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    if not USE_NUMBA:
        print("note: numba disabled or missing, the 'numba' column runs as plain Python")
    print(f"{'kernel':<17}{'input':<28}{'numba ms':>11}{'numpy ms':>11}{'ratio':>8}  equal")
    for name, (make_args, label) in cases(args.n).items():
        fast, slow = kernels.VARIANTS[name]
        if USE_NUMBA:
            fast(*make_args())  # compile
        t_fast, out_fast = best_of(fast, make_args, args.repeat)
        t_slow, out_slow = best_of(slow, make_args, args.repeat)
        ratio = t_slow / t_fast if t_fast > 0 else float("inf")
        print(f"{name:<17}{label:<28}{t_fast * 1e3:>11.2f}{t_slow * 1e3:>11.2f}{ratio:>8.1f}  {same(out_fast, out_slow)}")

    # end-to-end: spectrum of a 20-variable majority through the default path
    f = build_named("maj", args.n)
    t0 = time.perf_counter()
    from pdtlab.spectral import granularity, wht

    g = granularity(wht(f))
    print(f"\nend-to-end gran(maj:{args.n}) = {g} in {(time.perf_counter() - t0) * 1e3:.1f} ms "
          f"({'numba' if USE_NUMBA else 'numpy'} backend)")


if __name__ == "__main__":
    main()
