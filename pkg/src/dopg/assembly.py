"""Mass and stiffness matrices of the space-time Lyapunov system.

Row indices are test functions, column indices trial functions, e.g.
``S_tau[r, n] = int phi(s) (D^s psi_n, D^s Psi_r) ds``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from dopg.basis import Side, SpatialBasisConfig, TemporalBasisConfig, test_scale, trial_scale
from dopg.distribution import OrderDistribution, order_node_arrays
from dopg.errors import AssemblyError, ParameterError, QuadratureWarning
from dopg.orthopoly import gauss_jacobi_rule, jacobi_table, log_gamma_ratio
from dopg.problem import DiscretizationConfig, ProblemSpec

__all__ = [
    "OperatorSet",
    "spatial_mass",
    "temporal_mass",
    "temporal_stiffness_distributed",
    "spatial_stiffness_one_sided",
    "total_spatial_stiffness",
    "assemble_operators",
    "SYMMETRY_TOL",
]

SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class OperatorSet:
    """Assembled 1-D matrices; ``M[j]`` and ``S_tot[j]`` belong to dimension ``j``.

    ``stiffness_parts[j]`` keeps the four one-sided constituents of
    ``S_tot[j]`` under the keys ``adv_left``, ``adv_right``, ``diff_left``
    and ``diff_right``.
    """

    S_tau: NDArray
    M_tau: NDArray
    M: tuple[NDArray, ...]
    S_tot: tuple[NDArray, ...]
    gamma: float
    T: float
    bounds: tuple[tuple[float, float], ...]
    tau_b: float
    stiffness_parts: tuple[dict, ...] = ()
    warnings: tuple[str, ...] = ()
    meta: dict = field(default_factory=dict)

    @property
    def d(self) -> int:
        return len(self.M)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.M_tau.shape[0],) + tuple(m.shape[0] for m in self.M)

    def matrices(self) -> dict[str, NDArray]:
        """All matrices keyed by a file-friendly name."""
        out = {"S_tau": self.S_tau, "M_tau": self.M_tau}
        for j in range(self.d):
            out[f"M_{j + 1}"] = self.M[j]
            out[f"S_tot_{j + 1}"] = self.S_tot[j]
            for key, mat in (self.stiffness_parts[j] if self.stiffness_parts else {}).items():
                out[f"S_{key}_{j + 1}"] = mat
        return out


def _spatial_mass_block(rows: int, cols: int, length: float) -> NDArray:
    m = np.arange(1, cols + 1)
    k = np.arange(1, rows + 1)
    K, Mm = np.meshgrid(k, m, indexing="ij")
    core = np.zeros((rows, cols))
    diag = K == Mm
    core[diag] = 2.0 / (2 * Mm[diag] + 3) + 2.0 / (2 * Mm[diag] - 1)
    up = K == Mm + 2
    core[up] = -2.0 / (2 * Mm[up] + 3)
    down = K == Mm - 2
    core[down] = -2.0 / (2 * Mm[down] - 1)
    return 0.5 * length * test_scale(k)[:, None] * core * trial_scale(m)[None, :]


def spatial_mass(cfg: SpatialBasisConfig, n_trial: int | None = None) -> NDArray:
    """``M[k, m] = (phi_m, Phi_k)`` on ``(a, b)``, from Legendre orthogonality.

    ``n_trial`` widens the matrix to more trial columns than test rows.
    """
    return _spatial_mass_block(cfg.M, cfg.M if n_trial is None else n_trial, cfg.length)


def temporal_mass(cfg: TemporalBasisConfig, q_inner: int | None = None) -> NDArray:
    """``M_tau[r, n] = (psi_n, Psi_r)`` on ``(0, T)``.

    With the Gauss-Jacobi weight ``(1 - eta^2)^tau_b`` the remaining
    integrand is a polynomial of degree ``r + n - 2``.
    """
    N, tau = cfg.N, cfg.tau_b
    q = N + 10 if q_inner is None else q_inner
    rule = gauss_jacobi_rule(q, tau, tau)
    Pn = jacobi_table(N - 1, -tau, tau, rule.nodes)
    Pr = jacobi_table(N - 1, tau, -tau, rule.nodes)
    core = (Pr * rule.weights) @ Pn.T
    idx = np.arange(1, N + 1)
    return 0.5 * cfg.T * test_scale(idx)[:, None] * core * trial_scale(idx)[None, :]


def temporal_stiffness_distributed(
    cfg: TemporalBasisConfig,
    phi: OrderDistribution,
    q_order: int | None = None,
    q_inner: int | None = None,
) -> NDArray:
    """``S_tau[r, n] = int phi(s) (0D_t^s psi_n, tD_T^s Psi_r)_(0,T) ds``.

    For each order node ``s`` the product of the two derivatives carries the
    weight ``(1 - eta^2)^(tau_b - s)`` which is absorbed into a Gauss-Jacobi rule.
    """
    N, tau, T = cfg.N, cfg.tau_b, cfg.T
    phi.check_temporal()
    orders, weights = order_node_arrays(phi, q_order)
    if np.any(orders <= 0.0) or np.any(orders >= 1.0):
        raise ParameterError("temporal half-orders must lie in (0, 1)")
    q = N + 10 if q_inner is None else q_inner
    idx = np.arange(1, N + 1)
    S = np.zeros((N, N))
    for s, w in zip(orders, weights):
        dexp = tau - s
        if dexp <= -1.0:
            raise ParameterError(f"order {s} too large for basis exponent {tau}: weight not integrable")
        rule = gauss_jacobi_rule(q, dexp, dexp)
        Pn = jacobi_table(N - 1, -dexp, dexp, rule.nodes, check=False)
        Pr = jacobi_table(N - 1, dexp, -dexp, rule.nodes, check=False)
        g = log_gamma_ratio(idx + tau, idx + dexp)
        core = (Pr * rule.weights) @ Pn.T
        S += w * (2.0 / T) ** (2.0 * s) * (0.5 * T) * np.outer(g, g) * core
    return test_scale(idx)[:, None] * S * trial_scale(idx)[None, :]


def _combo(n: int) -> NDArray:
    """Map Legendre degrees ``0..n+1`` to the combinations ``P_{m+1} - P_{m-1}``."""
    C = np.zeros((n, n + 2))
    m = np.arange(n)
    C[m, m + 2] = 1.0
    C[m, m] = -1.0
    return C


def spatial_stiffness_one_sided(
    cfg: SpatialBasisConfig,
    dist: OrderDistribution,
    side: Side | str,
    q_order: int | None = None,
    q_inner: int | None = None,
    n_trial: int | None = None,
) -> NDArray:
    """One-sided distributed stiffness on ``(a, b)``.

    ``side='left'``:  ``S[r, n] = int rho(s) (aD_x^s phi_n, xD_b^s Phi_r) ds``
    ``side='right'``: ``S[r, n] = int rho(s) (aD_x^s Phi_r, xD_b^s phi_n) ds``

    Half-orders must lie in (1/2, 1). ``q_order`` defaults to ``M + 2``;
    fewer points raise a :class:`QuadratureWarning`. ``n_trial`` widens the
    matrix to more trial columns than test rows.
    """
    side = Side(side)
    rows = cfg.M
    cols = rows if n_trial is None else n_trial
    nmax = max(rows, cols)
    if q_order is None:
        q_order = nmax + 2
    elif not dist.is_dirac and q_order < nmax + 2:
        warnings.warn(
            f"order quadrature with {q_order} points is below the recommended {nmax + 2}",
            QuadratureWarning,
            stacklevel=2,
        )
    orders, weights = order_node_arrays(dist, q_order)
    if np.any(orders <= 0.5) or np.any(orders >= 1.0):
        raise ParameterError("spatial half-orders must lie in (1/2, 1)")
    q = nmax + 10 if q_inner is None else q_inner
    L = cfg.length
    deg_r = np.arange(rows + 2)
    deg_n = np.arange(cols + 2)
    St = np.zeros((rows + 2, cols + 2))
    for s, w in zip(orders, weights):
        rule = gauss_jacobi_rule(q, -s, -s)
        # trial side gets the left derivative for S_l, the right one for S_r
        a_n, a_r = (s, -s) if side is Side.LEFT else (-s, s)
        Pn = jacobi_table(cols + 1, a_n, -a_n, rule.nodes)
        Pr = jacobi_table(rows + 1, a_r, -a_r, rule.nodes)
        gn = log_gamma_ratio(deg_n + 1.0, deg_n + 1.0 - s)
        gr = log_gamma_ratio(deg_r + 1.0, deg_r + 1.0 - s)
        core = (Pr * rule.weights) @ Pn.T
        St += w * (2.0 / L) ** (2.0 * s) * (0.5 * L) * np.outer(gr, gn) * core
    S = _combo(rows) @ St @ _combo(cols).T
    return test_scale(np.arange(1, rows + 1))[:, None] * S * trial_scale(np.arange(1, cols + 1))[None, :]


def total_spatial_stiffness(Sl_adv, Sr_adv, Sl_diff, Sr_diff, c_l, c_r, kappa_l, kappa_r, check: bool = True) -> NDArray:
    """``c_l Sl_adv + c_r Sr_adv - kappa_l Sl_diff - kappa_r Sr_diff``.

    Raises :class:`AssemblyError` when the square result is not symmetric to
    ``SYMMETRY_TOL`` (relative to its largest entry).
    """
    S = c_l * np.asarray(Sl_adv) + c_r * np.asarray(Sr_adv) - kappa_l * np.asarray(Sl_diff) - kappa_r * np.asarray(Sr_diff)
    if check and S.shape[0] == S.shape[1]:
        scale = np.abs(S).max()
        if scale > 0 and np.abs(S - S.T).max() > SYMMETRY_TOL * scale:
            raise AssemblyError(
                f"total spatial stiffness not symmetric: {np.abs(S - S.T).max() / scale:.3e} relative"
            )
    return S


def spatial_operator_parts(
    problem: ProblemSpec,
    j: int,
    M: int,
    q_order: int | None,
    q_inner: int | None = None,
    n_trial: int | None = None,
) -> dict[str, NDArray]:
    """Four one-sided stiffness matrices for dimension ``j`` (zeros when unused)."""
    cfg = SpatialBasisConfig(M, *problem.bounds[j])
    shape = (M, M if n_trial is None else n_trial)
    parts = {}
    for family, dist, coefs in (
        ("adv", problem.advection[j], (problem.c_l[j], problem.c_r[j])),
        ("diff", problem.diffusion[j], (problem.kappa_l[j], problem.kappa_r[j])),
    ):
        for side, c in zip(("left", "right"), coefs):
            if c == 0.0 or dist is None:
                parts[f"{family}_{side}"] = np.zeros(shape)
            else:
                parts[f"{family}_{side}"] = spatial_stiffness_one_sided(
                    cfg, dist, side, q_order=q_order, q_inner=q_inner, n_trial=n_trial
                )
    return parts


def total_from_parts(problem: ProblemSpec, j: int, parts: dict[str, NDArray], check: bool = True) -> NDArray:
    return total_spatial_stiffness(
        parts["adv_left"], parts["adv_right"], parts["diff_left"], parts["diff_right"],
        problem.c_l[j], problem.c_r[j], problem.kappa_l[j], problem.kappa_r[j],
        check=check,
    )


def assemble_operators(problem: ProblemSpec, disc: DiscretizationConfig) -> OperatorSet:
    """Assemble every matrix of the Lyapunov system for ``problem``."""
    if len(disc.M) != problem.d:
        raise ParameterError(f"discretization has {len(disc.M)} spatial sizes for a {problem.d}-d problem")
    tcfg = disc.temporal_config(problem.T)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", QuadratureWarning)
        M_tau = temporal_mass(tcfg, disc.q_inner_time)
        S_tau = temporal_stiffness_distributed(tcfg, problem.temporal, disc.q_time, disc.q_inner_time)
        masses, totals, parts_all = [], [], []
        for j in range(problem.d):
            cfg = disc.spatial_config(j, problem.bounds[j])
            masses.append(spatial_mass(cfg))
            parts = spatial_operator_parts(
                problem, j, disc.M[j], disc.space_order_points(j), disc.q_inner_space
            )
            parts_all.append(parts)
            totals.append(total_from_parts(problem, j, parts))
    notes = tuple(str(w.message) for w in caught if issubclass(w.category, QuadratureWarning))
    for w in caught:
        if not issubclass(w.category, QuadratureWarning):
            warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)
    ops = OperatorSet(
        S_tau=S_tau,
        M_tau=M_tau,
        M=tuple(masses),
        S_tot=tuple(totals),
        gamma=problem.gamma,
        T=problem.T,
        bounds=problem.bounds,
        tau_b=disc.tau_b,
        stiffness_parts=tuple(parts_all),
        warnings=notes,
        meta={"problem": problem.describe(), "discretization": disc.describe()},
    )
    for name, mat in ops.matrices().items():
        if not np.all(np.isfinite(mat)):
            raise AssemblyError(f"matrix {name} has non-finite entries")
    return ops
