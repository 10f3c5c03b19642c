"""Cost of the eigen-decomposition solver in one, two and three dimensions.

The fast solver diagonalizes each one-dimensional pencil once and applies
the inverse through mode products, so going from 4 x 11 to 4 x 11^3
unknowns costs little extra time. The direct solver forms the Kronecker
system. It refuses sizes beyond its guard, and on small two-dimensional
problems it is competitive only while the system is tiny.
"""

import time

import numpy as np

from dopg.assembly import assemble_operators
from dopg.errors import SizeGuardError
from dopg.manufactured import case3
from dopg.postproc import linf_error
from dopg.solver import direct_solve, fast_solve


def best(fn, repeats=3):
    out = float("inf")
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        out = min(out, time.perf_counter() - t)
    return out


for d in (1, 2, 3):
    case = case3(d=d, p=2)
    disc = case.discretization(4, 11)
    ops = assemble_operators(case.problem, disc)
    F = case.load(disc)
    U = fast_solve(ops, F)
    t_fast = best(lambda: fast_solve(ops, F))
    try:
        t_direct = f"{best(lambda: direct_solve(ops, F), 1):.4f} s"
    except SizeGuardError as exc:
        t_direct = f"skipped ({exc})"
    err = linf_error(U, case.exact, 41 if d == 3 else 101).linf
    print(f"d={d}  {'x'.join(map(str, disc.shape)):>10}  error {err:.2e}  fast {t_fast:.4f} s  direct {t_direct}")

print("\nd = 2 solve time, random loads")
rng = np.random.default_rng(0)
case = case3(d=2, p=2)
for M in (2, 4, 6, 8, 10, 12):
    ops = assemble_operators(case.problem, case.discretization(4, M))
    F = rng.standard_normal(ops.shape)
    print(f"  M={M:2d}  fast {best(lambda: fast_solve(ops, F)):.5f} s  direct {best(lambda: direct_solve(ops, F)):.5f} s")
