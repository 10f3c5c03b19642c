"""Jacobi/Legendre polynomials and Gauss quadrature rules on [-1, 1].

Polynomials are evaluated with the forward three-term recurrence. Quadrature
nodes start from the eigenvalues of the symmetric tridiagonal Jacobi matrix
(Golub-Welsch) and are polished by Newton steps; the weights then come from
the closed-form derivative expression, which keeps the small end-point
weights accurate to relative round-off even for strongly singular weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import eigvalsh_tridiagonal
from scipy.special import gammaln

from dopg.errors import DomainError, ParameterError

__all__ = [
    "JacobiParams",
    "QuadratureRule",
    "jacobi_eval",
    "jacobi_table",
    "legendre_eval",
    "gauss_legendre_rule",
    "gauss_jacobi_rule",
    "log_gamma_ratio",
]


@dataclass(frozen=True)
class JacobiParams:
    """Parameters of the Jacobi weight ``(1 - x)**alpha * (1 + x)**beta``."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > -1.0 and self.beta > -1.0):
            raise ParameterError(
                f"Jacobi parameters must exceed -1, got alpha={self.alpha}, beta={self.beta}"
            )


@dataclass(frozen=True)
class QuadratureRule:
    """Gaussian quadrature rule on the standard interval (-1, 1).

    ``sum(weights * f(nodes))`` approximates the integral of ``w(x) f(x)``
    where ``w`` is the weight function of the rule (1 for Gauss-Legendre).
    """

    nodes: NDArray[np.float64]
    weights: NDArray[np.float64]
    kind: str
    order: int
    params: JacobiParams = field(default=JacobiParams(0.0, 0.0))

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    def integrate(self, values: ArrayLike, axis: int = -1) -> NDArray | float:
        """Apply the rule to function values sampled at ``nodes`` along ``axis``."""
        values = np.asarray(values)
        return np.tensordot(values, self.weights, axes=([axis], [0]))

    def mapped(self, lo: float, hi: float) -> tuple[NDArray, NDArray]:
        """Nodes and weights affinely mapped to ``(lo, hi)`` (weight function ignored)."""
        half = 0.5 * (hi - lo)
        return lo + half * (self.nodes + 1.0), half * self.weights


def _check_params(alpha: float, beta: float) -> None:
    JacobiParams(alpha, beta)


def jacobi_table(n: int, alpha: float, beta: float, x: ArrayLike, check: bool = True) -> NDArray:
    """Values of ``P_k^{alpha,beta}(x)`` for ``k = 0..n``.

    Returns an array of shape ``(n + 1,) + x.shape``. With ``check=False``
    parameters below -1 are allowed (the polynomials stay well defined as long
    as ``alpha + beta`` is not a negative integer).
    """
    if n < 0:
        raise ParameterError(f"degree must be non-negative, got {n}")
    if check:
        _check_params(alpha, beta)
    x = np.asarray(x, dtype=float)
    out = np.empty((n + 1,) + x.shape)
    out[0] = 1.0
    if n == 0:
        return out
    ab = alpha + beta
    out[1] = 0.5 * (alpha - beta) + 0.5 * (ab + 2.0) * x
    for k in range(1, n):
        c = 2.0 * k + ab
        a1 = 2.0 * (k + 1) * (k + ab + 1.0) * c
        a2 = (c + 1.0) * (alpha * alpha - beta * beta)
        a3 = c * (c + 1.0) * (c + 2.0)
        a4 = 2.0 * (k + alpha) * (k + beta) * (c + 2.0)
        out[k + 1] = ((a2 + a3 * x) * out[k] - a4 * out[k - 1]) / a1
    return out


def jacobi_eval(n: int, alpha: float, beta: float, x: ArrayLike) -> NDArray | float:
    """Evaluate the Jacobi polynomial ``P_n^{alpha,beta}`` at ``x``."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0):
        raise DomainError("Jacobi polynomials are evaluated on [-1, 1] only")
    val = jacobi_table(n, alpha, beta, x)[n]
    return float(val) if val.ndim == 0 else val


def legendre_eval(n: int, x: ArrayLike) -> NDArray | float:
    """Evaluate the Legendre polynomial ``P_n`` at ``x``."""
    return jacobi_eval(n, 0.0, 0.0, x)


def _jacobi_recurrence(q: int, alpha: float, beta: float) -> tuple[NDArray, NDArray, float]:
    """Diagonal, off-diagonal and zeroth moment of the monic Jacobi recurrence."""
    ab = alpha + beta
    k = np.arange(q, dtype=float)
    diag = np.empty(q)
    diag[0] = (beta - alpha) / (ab + 2.0)
    if q > 1:
        c = 2.0 * k[1:] + ab
        diag[1:] = (beta * beta - alpha * alpha) / (c * (c + 2.0))
    off = np.empty(max(q - 1, 0))
    if q > 1:
        # k = 1 written out to avoid 0/0 when alpha + beta = -1
        off[0] = 4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab) ** 2 * (3.0 + ab))
        if q > 2:
            kk = k[2:]
            c = 2.0 * kk + ab
            off[1:] = (
                4.0 * kk * (kk + alpha) * (kk + beta) * (kk + ab)
                / (c * c * (c + 1.0) * (c - 1.0))
            )
        off = np.sqrt(off)
    mu0 = np.exp(
        (ab + 1.0) * np.log(2.0) + gammaln(alpha + 1.0) + gammaln(beta + 1.0) - gammaln(ab + 2.0)
    )
    return diag, off, mu0


def _polish(q: int, alpha: float, beta: float, nodes: NDArray, steps: int = 2) -> tuple[NDArray, NDArray]:
    """Newton-refined nodes and the matching weights from ``P_q'``."""
    ab = alpha + beta
    for _ in range(steps):
        P = jacobi_table(q, alpha, beta, nodes)[q]
        dP = 0.5 * (q + ab + 1.0) * jacobi_table(q - 1, alpha + 1.0, beta + 1.0, nodes)[q - 1]
        nodes = np.clip(nodes - P / dP, -1.0, 1.0)
    dP = 0.5 * (q + ab + 1.0) * jacobi_table(q - 1, alpha + 1.0, beta + 1.0, nodes)[q - 1]
    logc = (
        (ab + 1.0) * np.log(2.0)
        + gammaln(q + alpha + 1.0)
        + gammaln(q + beta + 1.0)
        - gammaln(q + ab + 1.0)
        - gammaln(q + 1.0)
    )
    return nodes, np.exp(logc) / ((1.0 - nodes) * (1.0 + nodes) * dP * dP)


def gauss_jacobi_rule(q: int, alpha: float, beta: float) -> QuadratureRule:
    """Gauss-Jacobi rule with ``q`` points for the weight ``(1-x)^alpha (1+x)^beta``.

    The rule is exact for ``(1-x)^alpha (1+x)^beta p(x)`` with ``deg p <= 2q - 1``.
    """
    if int(q) != q or q < 1:
        raise ParameterError(f"quadrature order must be a positive integer, got {q}")
    q = int(q)
    params = JacobiParams(float(alpha), float(beta))
    diag, off, _ = _jacobi_recurrence(q, params.alpha, params.beta)
    nodes = diag.copy() if q == 1 else eigvalsh_tridiagonal(diag, off)
    nodes, weights = _polish(q, params.alpha, params.beta, nodes)
    if params.alpha == 0.0 and params.beta == 0.0:
        # enforce exact symmetry of the Legendre rule
        nodes = 0.5 * (nodes - nodes[::-1])
        weights = 0.5 * (weights + weights[::-1])
        kind = "gauss-legendre"
    else:
        kind = f"gauss-jacobi({params.alpha:g},{params.beta:g})"
    return QuadratureRule(nodes, weights, kind, q, params)


def gauss_legendre_rule(q: int) -> QuadratureRule:
    """Gauss-Legendre rule with ``q`` points, exact for degree ``2q - 1``."""
    return gauss_jacobi_rule(q, 0.0, 0.0)


def log_gamma_ratio(a: ArrayLike, b: ArrayLike) -> NDArray | float:
    """``Gamma(a) / Gamma(b)`` for positive arguments, evaluated in log space."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a <= 0.0) or np.any(b <= 0.0):
        raise DomainError("log_gamma_ratio requires positive arguments")
    val = np.exp(gammaln(a) - gammaln(b))
    return float(val) if val.ndim == 0 else val
