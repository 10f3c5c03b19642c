"""Trial/test functions of the space-time Petrov-Galerkin discretization.

Space uses Legendre combinations ``phi_m = sigma_m (P_{m+1} - P_{m-1})`` (trial)
and ``Phi_k = sigma~_k (P_{k+1} - P_{k-1})`` (test); time uses Jacobi
poly-fractonomials of the first kind ``psi_n = sigma_n (1+eta)^tau P_{n-1}^{-tau,tau}``
(trial) and second kind ``Psi_r = sigma~_r (1-eta)^tau P_{r-1}^{tau,-tau}`` (test).
Everything here lives on the standard interval [-1, 1]; use
:func:`affine_to_standard` and :func:`domain_scale_factor` for physical domains.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from dopg.errors import DomainError, EvaluationError, ParameterError
from dopg.orthopoly import jacobi_table, log_gamma_ratio

__all__ = [
    "Side",
    "TemporalBasisConfig",
    "SpatialBasisConfig",
    "trial_scale",
    "test_scale",
    "affine_to_standard",
    "spatial_basis_eval",
    "spatial_test_eval",
    "spatial_basis_table",
    "temporal_basis_eval",
    "temporal_test_eval",
    "temporal_basis_table",
    "temporal_test_table",
    "frac_deriv_legendre",
    "frac_deriv_temporal",
    "frac_integral_polyfrac",
    "domain_scale_factor",
]


class Side(str, enum.Enum):
    """Side of a one-sided fractional operator."""

    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class TemporalBasisConfig:
    """``N`` poly-fractonomial modes with exponent ``tau_b`` on ``(0, T)``."""

    N: int
    tau_b: float
    T: float = 2.0

    def __post_init__(self):
        if self.N < 1:
            raise ParameterError(f"need at least one temporal mode, got N={self.N}")
        _check_tau(self.tau_b)
        if not self.T > 0:
            raise ParameterError(f"final time must be positive, got T={self.T}")


@dataclass(frozen=True)
class SpatialBasisConfig:
    """``M`` Legendre-combination modes on ``(a, b)``."""

    M: int
    a: float = -1.0
    b: float = 1.0

    def __post_init__(self):
        if self.M < 1:
            raise ParameterError(f"need at least one spatial mode, got M={self.M}")
        if not self.a < self.b:
            raise ParameterError(f"empty interval ({self.a}, {self.b})")

    @property
    def length(self) -> float:
        return self.b - self.a


def _check_tau(tau_b: float) -> None:
    if not 0.0 < tau_b < 1.0:
        raise ParameterError(f"basis exponent must lie in (0, 1), got {tau_b}")


def _check_mode(m: int) -> None:
    if int(m) != m or m < 1:
        raise ParameterError(f"mode index must be a positive integer, got {m}")


def _as_standard(x: ArrayLike) -> NDArray:
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + 1e-14):
        raise DomainError("point outside the standard interval [-1, 1]")
    return np.clip(x, -1.0, 1.0)


def _scalar(v: NDArray):
    return float(v) if np.ndim(v) == 0 else v


def trial_scale(m: ArrayLike) -> NDArray:
    """``sigma_m = 2 + (-1)^m``."""
    m = np.asarray(m)
    return 2.0 + np.where(m % 2 == 0, 1.0, -1.0)


def test_scale(k: ArrayLike) -> NDArray:
    """``sigma~_k = 2 (-1)^k + 1``."""
    k = np.asarray(k)
    return 2.0 * np.where(k % 2 == 0, 1.0, -1.0) + 1.0


def affine_to_standard(x: ArrayLike, a: float, b: float) -> NDArray | float:
    """Map ``x`` in ``[a, b]`` to ``2 (x - a) / (b - a) - 1``."""
    if not a < b:
        raise ParameterError(f"empty interval ({a}, {b})")
    x = np.asarray(x, dtype=float)
    return _scalar(2.0 * (x - a) / (b - a) - 1.0)


def domain_scale_factor(sigma: float, length: float) -> float:
    """Chain-rule factor ``(2 / length)^sigma`` of an order-``sigma`` derivative."""
    return (2.0 / length) ** sigma


def spatial_basis_table(M: int, xi: ArrayLike, test: bool = False) -> NDArray:
    """Rows ``m = 1..M`` of the trial (or test) spatial functions at ``xi``."""
    _check_mode(M)
    xi = _as_standard(xi)
    P = jacobi_table(M + 1, 0.0, 0.0, xi)
    m = np.arange(1, M + 1)
    scale = test_scale(m) if test else trial_scale(m)
    return scale.reshape((-1,) + (1,) * xi.ndim) * (P[2:] - P[:-2])


def spatial_basis_eval(m: int, xi: ArrayLike) -> NDArray | float:
    """Trial function ``phi_m(xi)``; vanishes at both ends."""
    _check_mode(m)
    return _scalar(spatial_basis_table(m, xi)[m - 1])


def spatial_test_eval(k: int, xi: ArrayLike) -> NDArray | float:
    """Test function ``Phi_k(xi)``; vanishes at both ends."""
    _check_mode(k)
    return _scalar(spatial_basis_table(k, xi, test=True)[k - 1])


def temporal_basis_table(N: int, tau_b: float, eta: ArrayLike) -> NDArray:
    """Rows ``n = 1..N`` of ``psi_n^{tau_b}(eta)``."""
    _check_mode(N)
    _check_tau(tau_b)
    eta = _as_standard(eta)
    P = jacobi_table(N - 1, -tau_b, tau_b, eta)
    scale = trial_scale(np.arange(1, N + 1)).reshape((-1,) + (1,) * eta.ndim)
    return scale * (1.0 + eta) ** tau_b * P


def temporal_test_table(N: int, tau_b: float, eta: ArrayLike) -> NDArray:
    """Rows ``r = 1..N`` of ``Psi_r^{tau_b}(eta)``."""
    _check_mode(N)
    _check_tau(tau_b)
    eta = _as_standard(eta)
    P = jacobi_table(N - 1, tau_b, -tau_b, eta)
    scale = test_scale(np.arange(1, N + 1)).reshape((-1,) + (1,) * eta.ndim)
    return scale * (1.0 - eta) ** tau_b * P


def temporal_basis_eval(n: int, tau_b: float, eta: ArrayLike) -> NDArray | float:
    """First-kind poly-fractonomial ``psi_n``; zero at ``eta = -1``."""
    _check_mode(n)
    return _scalar(temporal_basis_table(n, tau_b, eta)[n - 1])


def temporal_test_eval(r: int, tau_b: float, eta: ArrayLike) -> NDArray | float:
    """Second-kind poly-fractonomial ``Psi_r``; zero at ``eta = 1``."""
    _check_mode(r)
    return _scalar(temporal_test_table(r, tau_b, eta)[r - 1])


def _side(side) -> Side:
    try:
        return Side(side)
    except ValueError:
        raise ParameterError(f"side must be 'left' or 'right', got {side!r}") from None


def _singular_factor(base: NDArray, power: float) -> NDArray:
    if power < 0 and np.any(base <= 0.0):
        raise EvaluationError("fractional derivative is singular at this endpoint")
    return base**power


def frac_deriv_legendre(side, n: int, sigma: float, xi: ArrayLike) -> NDArray | float:
    """One-sided Riemann-Liouville derivative of order ``sigma`` of ``P_n``.

    left:  ``Gamma(n+1)/Gamma(n-sigma+1) P_n^{sigma,-sigma}(xi) (1+xi)^{-sigma}``
    right: ``Gamma(n+1)/Gamma(n-sigma+1) P_n^{-sigma,sigma}(xi) (1-xi)^{-sigma}``
    """
    side = _side(side)
    if not 0.0 < sigma < 1.0:
        raise ParameterError(f"derivative order must lie in (0, 1), got {sigma}")
    if n < 0:
        raise ParameterError(f"degree must be non-negative, got {n}")
    xi = _as_standard(xi)
    g = log_gamma_ratio(n + 1.0, n - sigma + 1.0)
    if side is Side.LEFT:
        val = g * jacobi_table(n, sigma, -sigma, xi)[n] * _singular_factor(1.0 + xi, -sigma)
    else:
        val = g * jacobi_table(n, -sigma, sigma, xi)[n] * _singular_factor(1.0 - xi, -sigma)
    return _scalar(val)


def frac_deriv_temporal(side, n: int, tau_b: float, sigma: float, eta: ArrayLike) -> NDArray | float:
    """Order-``sigma`` derivative of a poly-fractonomial.

    ``side='left'`` differentiates the trial function ``psi_n`` from the left,
    ``side='right'`` differentiates the test function ``Psi_n`` from the right.
    ``sigma = 0`` returns the function itself.
    """
    side = _side(side)
    _check_mode(n)
    _check_tau(tau_b)
    if not 0.0 <= sigma < 1.0:
        raise ParameterError(f"derivative order must lie in [0, 1), got {sigma}")
    if tau_b - sigma <= -1.0:
        raise ParameterError("tau_b - sigma must exceed -1")
    eta = _as_standard(eta)
    d = tau_b - sigma
    g = log_gamma_ratio(n + tau_b, n + d)
    if side is Side.LEFT:
        P = jacobi_table(n - 1, -d, d, eta, check=False)[n - 1]
        val = trial_scale(n) * g * _singular_factor(1.0 + eta, d) * P
    else:
        P = jacobi_table(n - 1, d, -d, eta, check=False)[n - 1]
        val = test_scale(n) * g * _singular_factor(1.0 - eta, d) * P
    return _scalar(val)


def frac_integral_polyfrac(side, n: int, alpha: float, beta: float, sigma: float, x: ArrayLike) -> NDArray | float:
    """Riemann-Liouville integral of order ``sigma`` of a Jacobi poly-fractonomial.

    left:  ``I^sigma[(1+x)^beta P_n^{alpha,beta}]
            = Gamma(n+beta+1)/Gamma(n+beta+sigma+1) (1+x)^{beta+sigma} P_n^{alpha-sigma,beta+sigma}``
    right: ``I^sigma[(1-x)^alpha P_n^{alpha,beta}]
            = Gamma(n+alpha+1)/Gamma(n+alpha+sigma+1) (1-x)^{alpha+sigma} P_n^{alpha+sigma,beta-sigma}``
    """
    side = _side(side)
    if not 0.0 < sigma < 1.0:
        raise ParameterError(f"integral order must lie in (0, 1), got {sigma}")
    x = _as_standard(x)
    if side is Side.LEFT:
        g = log_gamma_ratio(n + beta + 1.0, n + beta + sigma + 1.0)
        val = g * (1.0 + x) ** (beta + sigma) * jacobi_table(n, alpha - sigma, beta + sigma, x, check=False)[n]
    else:
        g = log_gamma_ratio(n + alpha + 1.0, n + alpha + sigma + 1.0)
        val = g * (1.0 - x) ** (alpha + sigma) * jacobi_table(n, alpha + sigma, beta - sigma, x, check=False)[n]
    return _scalar(val)
