"""Compiled vs numpy geometric product, and the spin oracle on random loops.

    python benchmarks/bench_clifford.py [--repeat 200]
"""

import argparse
import timeit

import numpy as np

from sodegen import _clifford_py, oracles
from sodegen.models import random_so_loop

try:
    from sodegen import _clifford
except ImportError:  # pragma: no cover
    _clifford = None


def rotor_pair(n, g):
    """Dense even multivectors, the operand shape the oracle multiplies."""
    a, b = g.standard_normal((2, 1 << n))
    odd = np.array([bin(i).count("1") % 2 for i in range(1 << n)], dtype=bool)
    a[odd] = b[odd] = 0.0
    return a, b


def bench_products(repeat):
    g = np.random.default_rng(0)
    print(f"{'n':>3} {'numpy us':>10} {'compiled us':>12} {'speedup':>8}")
    for n in range(3, 11):
        a, b = rotor_pair(n, g)
        _clifford_py.geometric_product(a, b)  # build sign tables outside the timing
        t_py = min(timeit.repeat(lambda: _clifford_py.geometric_product(a, b),
                                 number=repeat, repeat=3)) / repeat
        if _clifford is None:
            print(f"{n:>3} {t_py * 1e6:>10.1f} {'n/a':>12}")
            continue
        _clifford.geometric_product(a, b)
        t_c = min(timeit.repeat(lambda: _clifford.geometric_product(a, b),
                                number=repeat, repeat=3)) / repeat
        assert np.allclose(_clifford.geometric_product(a, b), _clifford_py.geometric_product(a, b))
        print(f"{n:>3} {t_py * 1e6:>10.1f} {t_c * 1e6:>12.1f} {t_py / t_c:>8.1f}")


def bench_oracle(loops):
    print(f"\nspin_lift_sign per loop (48 samples), backend switched in place")
    print(f"{'n':>3} {'numpy ms':>10} {'compiled ms':>12}")
    saved = oracles.geometric_product
    try:
        for n in (3, 5, 8):
            data = [random_so_loop(n, s, "nontrivial", verify=False) for s in range(loops)]
            row = []
            for kernel in (_clifford_py.geometric_product,
                           _clifford.geometric_product if _clifford else None):
                if kernel is None:
                    row.append(float("nan"))
                    continue
                oracles.geometric_product = kernel
                t = min(timeit.repeat(lambda: [oracles.spin_lift_sign(x) for x in data],
                                      number=1, repeat=2)) / loops
                row.append(t * 1e3)
            print(f"{n:>3} {row[0]:>10.2f} {row[1]:>12.2f}")
    finally:
        oracles.geometric_product = saved


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=200)
    ap.add_argument("--loops", type=int, default=5)
    args = ap.parse_args()
    bench_products(args.repeat)
    bench_oracle(args.loops)
