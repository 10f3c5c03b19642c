"""Evaluation of Petrov-Galerkin solutions, error norms and convergence rates."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from dopg.basis import affine_to_standard, spatial_basis_table, temporal_basis_table
from dopg.errors import DomainError, ParameterError
from dopg.solver import SolutionTensor, mode_product

__all__ = [
    "GridSpec",
    "ErrorReport",
    "RateFit",
    "eval_solution",
    "eval_on_grid",
    "linf_error",
    "convergence_rate",
    "fit_rate",
    "CSV_COLUMNS",
    "ROUNDOFF_RELATIVE",
]

CSV_COLUMNS = ("modes", "linf", "l2", "seconds")
_MACHINE_FLOOR = 1e-13
# errors below this fraction of max|u| are treated as round-off
ROUNDOFF_RELATIVE = 2e-14


@dataclass(frozen=True)
class GridSpec:
    """Tensor evaluation grid: ``density`` points per axis, time axis from ``t0_fraction * T`` to ``T``."""

    density: int = 101
    t0_fraction: float = 0.01

    def __post_init__(self):
        if self.density < 2:
            raise ParameterError(f"grid density must be at least 2, got {self.density}")
        if not 0.0 < self.t0_fraction < 1.0:
            raise ParameterError("t0_fraction must lie in (0, 1)")

    def axes(self, T: float, bounds) -> list[NDArray]:
        return [np.linspace(self.t0_fraction * T, T, self.density)] + [
            np.linspace(a, b, self.density) for a, b in bounds
        ]


def _time_to_standard(t: ArrayLike, T: float) -> NDArray:
    t = np.asarray(t, dtype=float)
    if np.any(t < -1e-14 * T) or np.any(t > T * (1 + 1e-14)):
        raise DomainError("time outside [0, T]")
    return np.clip(2.0 * t / T - 1.0, -1.0, 1.0)


def _space_to_standard(x: ArrayLike, a: float, b: float) -> NDArray:
    x = np.asarray(x, dtype=float)
    tol = 1e-14 * (b - a)
    if np.any(x < a - tol) or np.any(x > b + tol):
        raise DomainError(f"point outside the spatial interval [{a}, {b}]")
    return np.clip(affine_to_standard(x, a, b), -1.0, 1.0)


def _axis_tables(U: SolutionTensor, coords: Sequence[ArrayLike]) -> list[NDArray]:
    if len(coords) != 1 + U.d:
        raise ParameterError(f"expected {1 + U.d} coordinate arrays, got {len(coords)}")
    N = U.shape[0]
    tabs = [temporal_basis_table(N, U.tau_b, _time_to_standard(coords[0], U.T))]
    for j, (a, b) in enumerate(U.bounds):
        tabs.append(spatial_basis_table(U.shape[j + 1], _space_to_standard(coords[j + 1], a, b)))
    return tabs


def eval_solution(U: SolutionTensor, points: ArrayLike) -> NDArray:
    """Values of ``sum u_hat psi_n(t) prod phi_mj(x_j)`` at scattered points.

    ``points`` has shape ``(P, 1 + d)`` with columns ``(t, x_1, ..., x_d)``.
    The contraction runs one mode at a time, so the cost per point is
    ``O(prod(shape))`` rather than a nested loop over all modes.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != 1 + U.d:
        raise ParameterError(f"points need {1 + U.d} columns, got {points.shape[1]}")
    tabs = _axis_tables(U, [points[:, i] for i in range(points.shape[1])])
    # contract the last axis first so that the point axis stays in front
    X = np.einsum("...m,mp->p...", U.coeffs, tabs[-1])
    for tab in reversed(tabs[:-1]):
        X = np.einsum("p...m,mp->p...", X, tab)
    return X


def eval_on_grid(U: SolutionTensor, axes: Sequence[ArrayLike]) -> NDArray:
    """Values on the tensor grid ``axes[0] x axes[1] x ...`` (sum-factorized)."""
    tabs = _axis_tables(U, axes)
    X = U.coeffs
    for axis, tab in enumerate(tabs):
        X = mode_product(X, tab.T, axis)
    return X


@dataclass
class ErrorReport:
    """Error of one solve on a tensor grid, plus an optional refinement history."""

    linf: float
    l2: float
    grid: GridSpec
    modes: tuple[int, ...] = ()
    seconds: float = float("nan")
    history: list = field(default_factory=list)
    rate: float | None = None

    def row(self) -> dict:
        return {
            "modes": "x".join(map(str, self.modes)),
            "linf": f"{self.linf:.6e}",
            "l2": f"{self.l2:.6e}",
            "seconds": f"{self.seconds:.4f}",
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        rows = self.history or [self]
        for r in rows:
            writer.writerow(r.row())
        return buf.getvalue()


def linf_error(U: SolutionTensor, exact, grid: GridSpec | int = 101, seconds: float = float("nan")) -> ErrorReport:
    """Max and discrete L2 deviation from ``exact`` on a tensor grid.

    ``exact`` is a separable function exposing ``grid_factors(t, xs)`` (fast
    path) or any callable ``exact(t, x_1, ...)`` that broadcasts. The time
    axis skips ``t = 0``; spatial end points are included. For ``d = 3`` the
    grid is processed one time slice at a time to bound memory.
    """
    if isinstance(grid, int):
        grid = GridSpec(grid)
    axes = grid.axes(U.T, U.bounds)
    tabs = _axis_tables(U, axes)
    spatial = U.coeffs
    for axis, tab in enumerate(tabs[1:], start=1):
        spatial = mode_product(spatial, tab.T, axis)
    factors = exact.grid_factors(axes[0], axes[1:]) if hasattr(exact, "grid_factors") else None
    linf, sq = 0.0, 0.0
    for i, t in enumerate(axes[0]):
        approx = np.tensordot(tabs[0][:, i], spatial, axes=(0, 0))
        if factors is not None:
            ref = factors[0][i] * _outer(factors[1:])
        else:
            ref = np.asarray(exact(t, *np.meshgrid(*axes[1:], indexing="ij", sparse=True)), dtype=float)
        diff = np.abs(approx - ref)
        linf = max(linf, float(diff.max()))
        sq += float(np.sum(diff**2))
    measure = U.T * (1 - grid.t0_fraction) * np.prod([b - a for a, b in U.bounds])
    l2 = float(np.sqrt(sq / (grid.density ** (1 + U.d)) * measure))
    return ErrorReport(linf, l2, grid, tuple(U.shape), seconds)


def _outer(vecs: Sequence[NDArray]) -> NDArray:
    out = vecs[0]
    for v in vecs[1:]:
        out = np.multiply.outer(out, v)
    return out


@dataclass(frozen=True)
class RateFit:
    """Least-squares algebraic rate with diagnostics."""

    rate: float
    intercept: float
    residual: float
    used: tuple[int, ...]
    monotone: bool


def fit_rate(history: Sequence[tuple[float, float]], last: int = 4, floor: float = _MACHINE_FLOOR) -> RateFit:
    """Fit ``error ~ C * modes^(-rate)`` on the tail of a refinement history.

    Points past the first one at or below ``floor`` (the round-off plateau)
    are dropped, then the last ``last`` remaining points are fitted in
    log-log scale. ``monotone`` reports whether the errors before the
    plateau decrease strictly.
    """
    if len(history) < 3:
        raise ParameterError("need at least 3 refinement points to fit a rate")
    modes = np.array([h[0] for h in history], dtype=float)
    errs = np.array([h[1] for h in history], dtype=float)
    if np.any(np.diff(modes) <= 0):
        raise ParameterError("refinement modes must increase strictly")
    if np.any(errs <= 0) or not np.all(np.isfinite(errs)):
        raise ParameterError("errors must be positive and finite")
    below = np.nonzero(errs <= floor)[0]
    stop = len(errs) if below.size == 0 else below[0] + 1
    idx = np.arange(stop)[-last:]
    if idx.size < 2:
        idx = np.arange(min(len(errs), 2))
    A = np.vstack([np.log(modes[idx]), np.ones(idx.size)]).T
    coef, *_ = np.linalg.lstsq(A, np.log(errs[idx]), rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - np.log(errs[idx])) ** 2)))
    monotone = bool(np.all(np.diff(errs[:stop]) < 0))
    return RateFit(float(-coef[0]), float(coef[1]), resid, tuple(int(i) for i in idx), monotone)


def convergence_rate(history: Sequence[tuple[float, float]], last: int = 4) -> float:
    """Sign-flipped log-log slope of ``error`` against ``modes`` (see :func:`fit_rate`)."""
    return fit_rate(history, last).rate
