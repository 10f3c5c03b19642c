"""Load tensors: general forcing by quadrature and fabricated loads for separable exact solutions.

A fabricated load pushes an exact solution ``u = t^s * prod_j u_j(x_j)``
through the weak form. The temporal factor stays exact (its distributed
derivatives are integrated in closed form under Gauss-Jacobi rules) while
each spatial factor is first projected on ``K`` trial functions, so the
spatial fractional operators act on coefficients through rectangular
``M_j x K`` stiffness and mass blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Callable, Sequence

import numpy as np
from numpy.typing import NDArray

from dopg.assembly import spatial_mass, spatial_operator_parts, total_from_parts
from dopg.basis import (
    SpatialBasisConfig,
    affine_to_standard,
    spatial_basis_table,
    temporal_test_table,
    test_scale,
)
from dopg.distribution import OrderDistribution, order_node_arrays
from dopg.errors import ParameterError
from dopg.orthopoly import gauss_jacobi_rule, gauss_legendre_rule, jacobi_table, log_gamma_ratio
from dopg.problem import DiscretizationConfig, ProblemSpec

__all__ = [
    "SpatialFactor",
    "SeparableFunction",
    "LoadTensor",
    "ManufacturedCase",
    "project_spatial",
    "assemble_load_quadrature",
    "fabricate_load",
    "temporal_load_vectors",
    "case1",
    "case2",
    "case3",
    "make_case",
    "REFERENCE_ORDER_QUADRATURE",
    "MAX_PROJECTION_TERMS",
    "DEFAULT_ANALYTIC_TERMS",
]

REFERENCE_ORDER_QUADRATURE = 40
MAX_PROJECTION_TERMS = 128
DEFAULT_ANALYTIC_TERMS = 25


@dataclass(frozen=True)
class SpatialFactor:
    """One spatial factor of a separable solution.

    Either the polynomial ``(1 + x)^p2 (1 - x)^p3`` (``kind='poly'``) or an
    arbitrary analytic callable (``kind='analytic'``) that vanishes at both
    ends of its interval. ``K`` fixes the projection truncation; ``None``
    picks ``max(M + 2, p2 + p3 - 1)`` for polynomials and 25 otherwise.
    """

    kind: str
    p2: int = 0
    p3: int = 0
    func: Callable[[NDArray], NDArray] | None = field(default=None, compare=False)
    label: str = ""
    K: int | None = None

    def __post_init__(self):
        if self.kind not in ("poly", "analytic"):
            raise ParameterError(f"unknown spatial factor kind {self.kind!r}")
        if self.kind == "poly" and (self.p2 < 1 or self.p3 < 1):
            raise ParameterError("polynomial factors need p2, p3 >= 1 to satisfy the boundary conditions")
        if self.kind == "analytic" and self.func is None:
            raise ParameterError("analytic factor needs a callable")
        if self.K is not None and self.K < 1:
            raise ParameterError("projection truncation must be at least 1")

    @classmethod
    def polynomial(cls, p2: int, p3: int, K: int | None = None) -> SpatialFactor:
        return cls("poly", int(p2), int(p3), None, f"(1+x)^{p2}(1-x)^{p3}", K)

    @classmethod
    def analytic(cls, func: Callable, label: str = "f(x)", K: int | None = None) -> SpatialFactor:
        return cls("analytic", 0, 0, func, label, K)

    @classmethod
    def sine(cls, k: float = 2.0, K: int | None = None) -> SpatialFactor:
        """``sin(k pi x)``; vanishes on ``(-1, 1)`` for integer ``k``."""
        return cls.analytic(lambda x: np.sin(k * np.pi * x), f"sin({k:g} pi x)", K)

    def __call__(self, x) -> NDArray:
        x = np.asarray(x, dtype=float)
        if self.kind == "poly":
            return (1.0 + x) ** self.p2 * (1.0 - x) ** self.p3
        return np.asarray(self.func(x), dtype=float)

    def truncation(self, M: int) -> int:
        if self.K is not None:
            return self.K
        if self.kind == "poly":
            return max(M + 2, self.p2 + self.p3 - 1)
        return DEFAULT_ANALYTIC_TERMS

    def describe(self) -> dict:
        return {"kind": self.kind, "label": self.label, "p2": self.p2, "p3": self.p3, "K": self.K}


@dataclass(frozen=True)
class SeparableFunction:
    """``u(t, x) = t^(p1 + alpha) * prod_j factor_j(x_j)``."""

    p1: int
    alpha: float
    factors: tuple[SpatialFactor, ...]

    def __post_init__(self):
        if int(self.p1) != self.p1 or self.p1 < 0:
            raise ParameterError(f"p1 must be a non-negative integer, got {self.p1}")
        if self.alpha < 0:
            raise ParameterError(f"alpha must be non-negative, got {self.alpha}")
        if not self.exponent > 0:
            raise ParameterError("temporal factor must vanish at t = 0 (p1 + alpha > 0)")
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ParameterError("need at least one spatial factor")

    @property
    def exponent(self) -> float:
        return self.p1 + self.alpha

    @property
    def d(self) -> int:
        return len(self.factors)

    def temporal(self, t) -> NDArray:
        return np.asarray(t, dtype=float) ** self.exponent

    def temporal_derivative(self, sigma: float, t) -> NDArray:
        """Left Riemann-Liouville derivative of order ``sigma`` of ``t^s`` (from 0)."""
        s = self.exponent
        return log_gamma_ratio(s + 1.0, s + 1.0 - sigma) * np.asarray(t, dtype=float) ** (s - sigma)

    def __call__(self, t, *x) -> NDArray:
        if len(x) != self.d:
            raise ParameterError(f"expected {self.d} spatial coordinates, got {len(x)}")
        return reduce(np.multiply, [f(xj) for f, xj in zip(self.factors, x)], self.temporal(t))

    def grid_factors(self, t, xs: Sequence) -> list[NDArray]:
        """1-d factor samples for tensor-grid evaluation."""
        return [self.temporal(t)] + [f(x) for f, x in zip(self.factors, xs)]

    def describe(self) -> dict:
        return {"p1": self.p1, "alpha": self.alpha, "factors": [f.describe() for f in self.factors]}


@dataclass(frozen=True)
class LoadTensor:
    """Right-hand side ``F[r, k_1, ..., k_d]`` with a record of how it was built."""

    values: NDArray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise ParameterError("load tensor has non-finite entries")

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape


def _fine_grid(cfg: SpatialBasisConfig, n: int = 1001) -> NDArray:
    return np.linspace(cfg.a, cfg.b, n)


def project_spatial(f: Callable, cfg: SpatialBasisConfig, K: int, q: int | None = None) -> tuple[NDArray, float]:
    """Petrov-Galerkin projection of ``f`` on the first ``K`` trial functions.

    Solves ``M c = b`` with ``M`` the ``K x K`` trial/test mass and
    ``b_k = (f, Phi_k)`` by Gauss-Legendre quadrature (``q`` points, default
    ``max(2K + 20, 60)``). Functions in the span are reproduced exactly.

    Returns
    -------
    coeffs : ndarray, shape (K,)
    error : float
        ``max |f - sum c_m phi_m|`` on 1001 equispaced points of the interval.
    """
    if int(K) != K or K < 1:
        raise ParameterError(f"truncation must be a positive integer, got {K}")
    if K > MAX_PROJECTION_TERMS:
        raise ParameterError(f"truncation {K} exceeds the available {MAX_PROJECTION_TERMS} basis functions")
    K = int(K)
    q = max(2 * K + 20, 60) if q is None else q
    rule = gauss_legendre_rule(q)
    x, w = rule.mapped(cfg.a, cfg.b)
    Phi = spatial_basis_table(K, rule.nodes, test=True)
    b = Phi @ (w * np.asarray(f(x), dtype=float))
    Mk = spatial_mass(SpatialBasisConfig(K, cfg.a, cfg.b))
    coeffs = np.linalg.solve(Mk, b)
    xf = _fine_grid(cfg)
    recon = coeffs @ spatial_basis_table(K, affine_to_standard(xf, cfg.a, cfg.b))
    error = float(np.abs(recon - f(xf)).max())
    return coeffs, error


def temporal_load_vectors(
    u: SeparableFunction,
    phi: OrderDistribution,
    N: int,
    tau_b: float,
    T: float,
    q_order: int = REFERENCE_ORDER_QUADRATURE,
    q_inner: int | None = None,
) -> tuple[NDArray, NDArray]:
    """Exact-factor temporal pieces of a fabricated load.

    ``mt[r] = (t^s, Psi_r)`` and
    ``st[r] = int phi(tau) (0D_t^tau t^s, tD_T^tau Psi_r) dtau``.
    Each inner integral carries ``(1 - eta)^a (1 + eta)^b`` endpoint factors
    that are folded into a Gauss-Jacobi rule, so both are exact up to the
    order quadrature.
    """
    s = u.exponent
    q = N + 20 if q_inner is None else q_inner
    idx = np.arange(1, N + 1)
    half = 0.5 * T
    rule = gauss_jacobi_rule(q, tau_b, s)
    P = jacobi_table(N - 1, tau_b, -tau_b, rule.nodes)
    mt = half ** (s + 1.0) * test_scale(idx) * (P @ rule.weights)

    orders, weights = order_node_arrays(phi, q_order)
    st = np.zeros(N)
    for tau, w in zip(orders, weights):
        dexp = tau_b - tau
        rule = gauss_jacobi_rule(q, dexp, s - tau)
        P = jacobi_table(N - 1, dexp, -dexp, rule.nodes, check=False)
        g = log_gamma_ratio(idx + tau_b, idx + dexp)
        # (T/2) from dt, (T/2)^(s - tau) from t^(s - tau), (2/T)^tau from the test derivative
        scale = half * half ** (s - 2.0 * tau) * log_gamma_ratio(s + 1.0, s + 1.0 - tau)
        st += w * scale * g * (P @ rule.weights)
    return mt, test_scale(idx) * st


def fabricate_load(
    u: SeparableFunction,
    problem: ProblemSpec,
    disc: DiscretizationConfig,
    q_order: int = REFERENCE_ORDER_QUADRATURE,
) -> LoadTensor:
    """Load tensor of the exact solution ``u`` pushed through the weak form.

    ``F = st x mx_1 x ... x mx_d + sum_j mt x ... x sx_j x ... + gamma mt x mx_1 x ...``
    where ``mx_j = M_j c_j`` and ``sx_j = S_j c_j`` apply rectangular
    ``M_j x K_j`` blocks to the projected coefficients ``c_j``. Both the
    temporal and the spatial distributed operators use a reference order
    quadrature of ``q_order`` points (at least ``K_j + 2``), independent of
    the quadrature used for the system matrices.
    """
    if u.d != problem.d or len(disc.M) != problem.d:
        raise ParameterError("exact solution, problem and discretization disagree on the dimension")
    mt, st = temporal_load_vectors(u, problem.temporal, disc.N, disc.tau_b, problem.T, q_order, disc.q_inner_time)
    mx, sx, trunc, proj_err = [], [], [], []
    for j, (factor, M) in enumerate(zip(u.factors, disc.M)):
        K = factor.truncation(M)
        cfg = SpatialBasisConfig(M, *problem.bounds[j])
        coeffs, err = project_spatial(factor, cfg, K)
        qo = max(q_order, max(M, K) + 2)
        parts = spatial_operator_parts(problem, j, M, qo, n_trial=K)
        mx.append(spatial_mass(cfg, n_trial=K) @ coeffs)
        sx.append(total_from_parts(problem, j, parts, check=False) @ coeffs)
        trunc.append(K)
        proj_err.append(err)
    outer = lambda vecs: reduce(np.multiply.outer, vecs)
    F = outer([st] + mx)
    for j in range(problem.d):
        F = F + outer([mt] + mx[:j] + [sx[j]] + mx[j + 1:])
    if problem.gamma != 0.0:
        F = F + problem.gamma * outer([mt] + mx)
    prov = {
        "method": "fabricated",
        "exact": u.describe(),
        "truncation": trunc,
        "projection_error": proj_err,
        "order_quadrature": q_order,
    }
    return LoadTensor(np.ascontiguousarray(F), prov)


def assemble_load_quadrature(
    f: Callable,
    problem: ProblemSpec,
    disc: DiscretizationConfig,
    q: Sequence[int] | int | None = None,
    singular_exponents: Sequence[float] | None = None,
) -> LoadTensor:
    """``F[r, k...] = int f(t, x) Psi_r(t) prod_j Phi_kj(x_j)`` by tensor Gauss quadrature.

    Time uses Gauss-Jacobi with the ``(1 - eta)^tau_b`` factor of the test
    functions in the weight, space uses Gauss-Legendre. ``f(t, x_1, ..., x_d)``
    must broadcast over arrays. ``singular_exponents`` (one per axis,
    time first) folds a known ``(1 + .)^beta`` endpoint behaviour of ``f``
    at the left end of each axis into the rule; ``f`` is then divided by
    that factor at the (interior) nodes. ``q`` defaults to ``n + 20`` per axis.
    """
    d = problem.d
    shape = disc.shape
    if q is None:
        q = [n + 20 for n in shape]
    elif np.ndim(q) == 0:
        q = [int(q)] * (d + 1)
    betas = [0.0] * (d + 1) if singular_exponents is None else [float(b) for b in singular_exponents]
    if len(q) != d + 1 or len(betas) != d + 1:
        raise ParameterError("need one quadrature order and exponent per axis")
    N, tau_b, T = disc.N, disc.tau_b, problem.T

    rule = gauss_jacobi_rule(q[0], tau_b, betas[0])
    t = 0.5 * T * (rule.nodes + 1.0)
    Psi = temporal_test_table(N, tau_b, rule.nodes) / (1.0 - rule.nodes) ** tau_b
    tables = [Psi * rule.weights * 0.5 * T / (1.0 + rule.nodes) ** betas[0]]
    pts = [t]
    for j in range(d):
        a, b = problem.bounds[j]
        rule = gauss_jacobi_rule(q[j + 1], 0.0, betas[j + 1])
        x = a + 0.5 * (b - a) * (rule.nodes + 1.0)
        Phi = spatial_basis_table(disc.M[j], rule.nodes, test=True)
        tables.append(Phi * rule.weights * 0.5 * (b - a) / (1.0 + rule.nodes) ** betas[j + 1])
        pts.append(x)
    vals = np.asarray(f(*np.meshgrid(*pts, indexing="ij", sparse=True)), dtype=float)
    vals = np.broadcast_to(vals, tuple(len(p) for p in pts))
    F = vals
    for axis, W in enumerate(tables):
        F = np.moveaxis(np.tensordot(W, F, axes=([1], [axis])), 0, axis)
    prov = {"method": "quadrature", "q": list(q), "singular_exponents": betas}
    return LoadTensor(np.ascontiguousarray(F), prov)


@dataclass(frozen=True)
class ManufacturedCase:
    """A named problem together with its exact solution."""

    name: str
    problem: ProblemSpec
    exact: SeparableFunction

    @property
    def tau_b(self) -> float:
        """Basis exponent matched to the temporal singularity (``alpha``)."""
        return self.exact.alpha

    def discretization(self, N: int, M, **kw) -> DiscretizationConfig:
        M = (M,) * self.problem.d if np.ndim(M) == 0 else tuple(M)
        return DiscretizationConfig(N, M, kw.pop("tau_b", self.tau_b), **kw)

    def load(self, disc: DiscretizationConfig, **kw) -> LoadTensor:
        return fabricate_load(self.exact, self.problem, disc, **kw)

    def describe(self) -> dict:
        return {"name": self.name, "exact": self.exact.describe(), "problem": self.problem.describe()}


DEFAULT_TEMPORAL = OrderDistribution.constant(1.0, 0.1, 0.4)
DEFAULT_DIFFUSION = OrderDistribution.constant(1.0, 0.6, 0.9)


def _case_problem(d: int, temporal, diffusion, gamma: float) -> ProblemSpec:
    return ProblemSpec.create(
        temporal=DEFAULT_TEMPORAL if temporal is None else temporal,
        diffusion=DEFAULT_DIFFUSION if diffusion is None else diffusion,
        d=d,
        T=2.0,
        bounds=(-1.0, 1.0),
        gamma=gamma,
        kappa_l=1.0,
    )


def case1(
    p1: int = 3, p2: int = 2, p3: int = 2, alpha: float = 1e-4, d: int = 1,
    temporal=None, diffusion=None, gamma: float = 0.0,
) -> ManufacturedCase:
    """Power-law-in-time, polynomial-in-space solution ``t^(p1+alpha) prod (1+x)^p2 (1-x)^p3``."""
    exact = SeparableFunction(p1, alpha, (SpatialFactor.polynomial(p2, p3),) * d)
    return ManufacturedCase("case1", _case_problem(d, temporal, diffusion, gamma), exact)


def case2(
    p1: int = 3, alpha: float = 0.1, K: int = DEFAULT_ANALYTIC_TERMS, wavenumber: float = 2.0, d: int = 1,
    temporal=None, diffusion=None, gamma: float = 0.0,
) -> ManufacturedCase:
    """``t^(p1+alpha) sin(2 pi x)``; the sine is projected on ``K`` trial functions."""
    exact = SeparableFunction(p1, alpha, (SpatialFactor.sine(wavenumber, K),) * d)
    return ManufacturedCase("case2", _case_problem(d, temporal, diffusion, gamma), exact)


def case3(
    d: int = 2, p1: int = 3, p: int = 1, alpha: float = 1e-4,
    temporal=None, diffusion=None, gamma: float = 0.0,
) -> ManufacturedCase:
    """Case-I-type solution in ``d`` dimensions with ``p2 = p3 = p`` in every factor."""
    exact = SeparableFunction(p1, alpha, (SpatialFactor.polynomial(p, p),) * d)
    return ManufacturedCase("case3", _case_problem(d, temporal, diffusion, gamma), exact)


_CASES = {"case1": case1, "case2": case2, "case3": case3}


def make_case(name: str, **params) -> ManufacturedCase:
    """Look up a manufactured case by name (``case1``, ``case2``, ``case3``)."""
    try:
        builder = _CASES[name]
    except KeyError:
        raise ParameterError(f"unknown case {name!r}; choose one of {sorted(_CASES)}") from None
    return builder(**params)
