"""Structure of the assembled space-time matrices.

The spatial mass matrix only couples modes whose indices differ by 0 or 2.
The one-sided stiffness matrices are dense but symmetric. The left and right
versions differ only by a checkerboard sign pattern. The mass is symmetric
but not positive definite because the test functions alternate in sign.
"""

import numpy as np

from dopg.assembly import assemble_operators, spatial_mass
from dopg.basis import SpatialBasisConfig
from dopg.distribution import OrderDistribution
from dopg.problem import DiscretizationConfig, ProblemSpec

np.set_printoptions(precision=3, suppress=True, linewidth=110)

M = spatial_mass(SpatialBasisConfig(6))
print("spatial mass (M = 6):")
print(M)
print("eigenvalues:", np.linalg.eigvalsh(M))

problem = ProblemSpec.create(
    temporal=OrderDistribution.constant(1.0, 0.1, 0.4),
    diffusion=OrderDistribution.constant(1.0, 0.6, 0.9),
    kappa_l=1.0,
    kappa_r=0.5,
)
ops = assemble_operators(problem, DiscretizationConfig(4, (6,), 0.25))
mats = ops.matrices()
Sl, Sr = mats["S_diff_left_1"], mats["S_diff_right_1"]
k, m = np.indices(Sl.shape)
print("\nleft diffusion stiffness:")
print(Sl)
print("asymmetry |S - S^T| / |S|:", np.abs(Sl - Sl.T).max() / np.abs(Sl).max())
print("right = (-1)^(k+m) left:", np.allclose(Sr, (-1.0) ** (k + m) * Sl, rtol=1e-12, atol=1e-12))
print("\ntemporal stiffness (N = 4):")
print(ops.S_tau)
if ops.warnings:
    print("notes:", *ops.warnings, sep="\n  ")
