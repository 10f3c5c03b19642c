"""Problem and discretization descriptions shared by assembly, loads and solvers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from dopg.basis import SpatialBasisConfig, TemporalBasisConfig
from dopg.distribution import DEFAULT_ORDER_QUADRATURE, OrderDistribution
from dopg.errors import ParameterError

__all__ = ["ProblemSpec", "DiscretizationConfig"]


def _per_dim(value, d: int, name: str) -> tuple:
    if isinstance(value, (list, tuple)):
        if len(value) != d:
            raise ParameterError(f"{name} needs {d} entries, got {len(value)}")
        return tuple(value)
    return (value,) * d


@dataclass(frozen=True)
class ProblemSpec:
    """Distributed-order problem on ``(0, T) x prod_j (a_j, b_j)``.

    Operator (weak form)::

        int phi(t) (D_t u, D_T v) dt
        + sum_j int varrho_j [c_l (D_a u, D_b v) + c_r (D_a v, D_b u)]
        - sum_j int rho_j    [kappa_l (D_a u, D_b v) + kappa_r (D_a v, D_b u)]
        + gamma (u, v)

    ``advection`` holds the ``varrho_j``, ``diffusion`` the ``rho_j``.
    """

    T: float
    bounds: tuple[tuple[float, float], ...]
    temporal: OrderDistribution
    diffusion: tuple[OrderDistribution | None, ...]
    advection: tuple[OrderDistribution | None, ...]
    gamma: float = 0.0
    c_l: tuple[float, ...] = ()
    c_r: tuple[float, ...] = ()
    kappa_l: tuple[float, ...] = ()
    kappa_r: tuple[float, ...] = ()

    @classmethod
    def create(
        cls,
        temporal: OrderDistribution,
        diffusion: OrderDistribution | Sequence[OrderDistribution | None] | None,
        d: int = 1,
        T: float = 2.0,
        bounds: Sequence[tuple[float, float]] | tuple[float, float] = (-1.0, 1.0),
        advection: OrderDistribution | Sequence[OrderDistribution | None] | None = None,
        gamma: float = 0.0,
        c_l=0.0,
        c_r=0.0,
        kappa_l=1.0,
        kappa_r=0.0,
    ) -> ProblemSpec:
        """Build a problem, broadcasting scalar arguments over the ``d`` dimensions."""
        if d < 1:
            raise ParameterError("need at least one spatial dimension")
        if len(bounds) == 2 and not isinstance(bounds[0], (list, tuple)):
            bounds = (tuple(bounds),) * d
        bounds = tuple((float(a), float(b)) for a, b in bounds)
        if len(bounds) != d:
            raise ParameterError(f"need {d} spatial intervals, got {len(bounds)}")
        return cls(
            T=float(T),
            bounds=bounds,
            temporal=temporal,
            diffusion=_per_dim(diffusion, d, "diffusion"),
            advection=_per_dim(advection, d, "advection"),
            gamma=float(gamma),
            c_l=tuple(map(float, _per_dim(c_l, d, "c_l"))),
            c_r=tuple(map(float, _per_dim(c_r, d, "c_r"))),
            kappa_l=tuple(map(float, _per_dim(kappa_l, d, "kappa_l"))),
            kappa_r=tuple(map(float, _per_dim(kappa_r, d, "kappa_r"))),
        )

    def __post_init__(self):
        d = len(self.bounds)
        if not self.T > 0:
            raise ParameterError(f"final time must be positive, got {self.T}")
        for a, b in self.bounds:
            if not a < b:
                raise ParameterError(f"empty spatial interval ({a}, {b})")
        for name in ("diffusion", "advection", "c_l", "c_r", "kappa_l", "kappa_r"):
            if len(getattr(self, name)) != d:
                raise ParameterError(f"{name} must have one entry per dimension")
        self.temporal.check_temporal()
        for j in range(d):
            if (self.c_l[j] or self.c_r[j]) and self.advection[j] is None:
                raise ParameterError(f"dimension {j + 1}: advection coefficients need a distribution")
            if (self.kappa_l[j] or self.kappa_r[j]) and self.diffusion[j] is None:
                raise ParameterError(f"dimension {j + 1}: diffusion coefficients need a distribution")

    @property
    def d(self) -> int:
        return len(self.bounds)

    def describe(self) -> dict:
        return {
            "T": self.T,
            "bounds": [list(b) for b in self.bounds],
            "gamma": self.gamma,
            "c_l": list(self.c_l),
            "c_r": list(self.c_r),
            "kappa_l": list(self.kappa_l),
            "kappa_r": list(self.kappa_r),
            "temporal": self.temporal.describe(),
            "diffusion": [None if r is None else r.describe() for r in self.diffusion],
            "advection": [None if r is None else r.describe() for r in self.advection],
        }


@dataclass(frozen=True)
class DiscretizationConfig:
    """Expansion orders and quadrature counts.

    ``q_space=None`` uses ``M_j + 2`` order-quadrature points per dimension,
    the minimum point count for the spatial stiffness entries. Inner
    (Gauss-Jacobi) counts default to ``M_j + 10`` and ``N + 10``.
    """

    N: int
    M: tuple[int, ...]
    tau_b: float
    q_time: int = DEFAULT_ORDER_QUADRATURE
    q_space: int | None = None
    q_inner_time: int | None = None
    q_inner_space: int | None = None
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if isinstance(self.M, int):
            object.__setattr__(self, "M", (self.M,))
        object.__setattr__(self, "M", tuple(int(m) for m in self.M))
        TemporalBasisConfig(self.N, self.tau_b)
        for m in self.M:
            SpatialBasisConfig(m)
        for q in (self.q_time, self.q_space, self.q_inner_time, self.q_inner_space):
            if q is not None and q < 1:
                raise ParameterError("quadrature counts must be positive")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) + self.M

    def temporal_config(self, T: float) -> TemporalBasisConfig:
        return TemporalBasisConfig(self.N, self.tau_b, T)

    def spatial_config(self, j: int, bounds: tuple[float, float]) -> SpatialBasisConfig:
        return SpatialBasisConfig(self.M[j], *bounds)

    def space_order_points(self, j: int) -> int:
        return self.M[j] + 2 if self.q_space is None else self.q_space

    def describe(self) -> dict:
        return {
            "N": self.N,
            "M": list(self.M),
            "tau_b": self.tau_b,
            "q_time": self.q_time,
            "q_space": self.q_space,
            "q_inner_time": self.q_inner_time,
            "q_inner_space": self.q_inner_space,
        }
