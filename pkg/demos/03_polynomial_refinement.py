"""Spatial and temporal refinement for a power-law-in-time solution.

The exact solution t^(3 + alpha) (1 + x)^2 (1 - x)^2 lies in the span of the
trial functions once M >= 3 and N >= 4. The error then drops to round-off.
The load is built from projections computed with a finer order quadrature
than the solver uses, so the error above the plateau is the residual
mismatch between the two.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from dopg.assembly import assemble_operators
from dopg.manufactured import case1
from dopg.postproc import fit_rate, linf_error
from dopg.solver import fast_solve

case = case1(p1=3, p2=2, p3=2, alpha=1e-4)


def error(N, M):
    disc = case.discretization(N, M)
    U = fast_solve(assemble_operators(case.problem, disc), case.load(disc))
    return linf_error(U, case.exact).linf


space = [(M, error(4, M)) for M in range(2, 9)]
time = [(N, error(N, 9)) for N in range(1, 9)]
for label, hist in (("M (N = 4)", space), ("N (M = 9)", time)):
    print(label)
    for k, e in hist:
        print(f"  {k:2d}  {e:.3e}")
print("spatial rate fit:", fit_rate(space, floor=1.6e-13))

fig, ax = plt.subplots(figsize=(5, 3.5))
ax.semilogy(*zip(*space), "o-", label="refine M, N = 4")
ax.semilogy(*zip(*time), "s--", label="refine N, M = 9")
ax.set_xlabel("modes")
ax.set_ylabel("max error")
ax.legend()
fig.tight_layout()
fig.savefig("polynomial_refinement.svg")
print("wrote polynomial_refinement.svg")
