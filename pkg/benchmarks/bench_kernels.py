"""Timing comparison for the tuple-enumeration kernels.

Runs the compiled extension against the pure-Python reference on the three
hot sums (all tuples, distinct tuples, fixed kernel pattern), and against the
factorized fast path for the unrestricted sum.  Invoke as a script:

    python3 benchmarks/bench_kernels.py [--cells 40] [--arity 4] [--repeat 5]

The two backends enumerate tuples in the same order, so they agree bit for
bit; the point of this file is the wall-clock ratio.
"""

import argparse
import time

import numpy as np

from stratolevy._kernels import pyref
from stratolevy.partitions import Partition

try:
    from stratolevy._kernels import _core
except ImportError:
    _core = None


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        value = fn()
        best = min(best, time.perf_counter() - t0)
    return value, best


def run(cells, arity, repeat, seed):
    rng = np.random.default_rng(seed)
    atoms = rng.standard_normal((arity, cells))
    f = rng.standard_normal(cells**arity)
    labels = np.ascontiguousarray(
        Partition(arity, [[1, 2], *[[k] for k in range(3, arity + 1)]]).rgs,
        dtype=np.intp)

    cases = [
        ("all", lambda impl: impl.weighted_sum_all(f, atoms)),
        ("distinct", lambda impl: impl.weighted_sum_distinct(f, atoms)),
        ("kernel", lambda impl: impl.weighted_sum_kernel(f, atoms, labels, True)),
    ]

    print(f"cells={cells} arity={arity} tuples={cells**arity:,} repeat={repeat}")
    print(f"{'sum':<10}{'python':>12}{'cython':>12}{'speedup':>10}")
    for name, call in cases:
        v_py, t_py = _time(lambda: call(pyref), repeat)
        if _core is None:
            print(f"{name:<10}{t_py:>11.4f}s{'n/a':>12}{'':>10}")
            continue
        v_cy, t_cy = _time(lambda: call(_core), repeat)
        assert v_py == v_cy, (name, v_py, v_cy)
        print(f"{name:<10}{t_py:>11.4f}s{t_cy:>11.4f}s{t_py / t_cy:>9.1f}x")

    # product structure: the unrestricted sum of a pure product factorizes
    # into a product of row sums, which beats both enumerators outright
    v_enum, t_enum = _time(
        lambda: (pyref if _core is None else _core).weighted_sum_all(None, atoms),
        repeat)
    v_fast, t_fast = _time(lambda: float(np.prod(atoms.sum(axis=1))), repeat)
    assert abs(v_enum - v_fast) <= 1e-9 * (1.0 + abs(v_enum))
    print(f"{'row-sums':<10}{t_enum:>11.4f}s{t_fast:>11.6f}s"
          f"{t_enum / t_fast:>9.0f}x   (f = 1, factorized)")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--cells", type=int, default=40)
    parser.add_argument("--arity", type=int, default=4)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=2024)
    args = parser.parse_args()
    run(args.cells, args.arity, args.repeat, args.seed)


if __name__ == "__main__":
    main()
