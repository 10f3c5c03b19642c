"""Order distributions and quadrature over the derivative-order dimension.

All orders are *half-orders*: a distribution on ``(lo, hi)`` weights the
operators whose physical order is ``2 * sigma`` for ``sigma`` in that range.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from numpy.typing import NDArray

from dopg.errors import DomainError, ParameterError
from dopg.orthopoly import gauss_legendre_rule

__all__ = [
    "DEFAULT_ORDER_QUADRATURE",
    "OrderDistribution",
    "OrderNode",
    "order_nodes",
    "order_node_arrays",
    "distributed_integral",
]

DEFAULT_ORDER_QUADRATURE = 20


class OrderNode(NamedTuple):
    order: float
    weight: float


@dataclass(frozen=True)
class OrderDistribution:
    """A positive weight function over a half-order interval ``(lo, hi)``.

    Build instances with :meth:`dirac`, :meth:`constant` or :meth:`table`.
    ``expr`` keeps the textual form of a table weight (for manifests only).
    """

    lo: float
    hi: float
    kind: str
    at: float | None = None
    value: float | None = None
    weight: Callable[[NDArray], NDArray] | None = None
    expr: str | None = None
    quadrature_order: int = DEFAULT_ORDER_QUADRATURE

    def __post_init__(self):
        if self.kind == "dirac":
            if self.at is None:
                raise ParameterError("dirac distribution needs a location")
            if not (self.lo <= self.at <= self.hi):
                raise DomainError(f"dirac location {self.at} outside [{self.lo}, {self.hi}]")
        elif self.kind in ("constant", "table"):
            if not self.lo < self.hi:
                raise ParameterError(f"empty order interval ({self.lo}, {self.hi})")
            if self.kind == "constant" and not (self.value is not None and self.value > 0):
                raise ParameterError("constant distribution needs a positive value")
            if self.kind == "table" and self.weight is None:
                raise ParameterError("table distribution needs a weight function")
        else:
            raise ParameterError(f"unknown distribution kind {self.kind!r}")
        if self.quadrature_order < 1:
            raise ParameterError("order quadrature needs at least one point")

    @classmethod
    def dirac(cls, at: float, lo: float | None = None, hi: float | None = None) -> OrderDistribution:
        """Point mass at half-order ``at``; recovers a single fixed-order operator."""
        return cls(at if lo is None else lo, at if hi is None else hi, "dirac", at=at)

    @classmethod
    def constant(cls, value: float, lo: float, hi: float, quadrature_order: int = DEFAULT_ORDER_QUADRATURE) -> OrderDistribution:
        return cls(lo, hi, "constant", value=value, quadrature_order=quadrature_order)

    @classmethod
    def table(
        cls,
        weight: Callable[[NDArray], NDArray],
        lo: float,
        hi: float,
        expr: str | None = None,
        quadrature_order: int = DEFAULT_ORDER_QUADRATURE,
    ) -> OrderDistribution:
        """Analytic weight ``weight(sigma)`` sampled at the order-quadrature nodes."""
        return cls(lo, hi, "table", weight=weight, expr=expr, quadrature_order=quadrature_order)

    @property
    def is_dirac(self) -> bool:
        return self.kind == "dirac"

    def __call__(self, sigma):
        sigma = np.asarray(sigma, dtype=float)
        if self.kind == "constant":
            return np.full(sigma.shape, float(self.value))
        if self.kind == "table":
            return np.asarray(self.weight(sigma), dtype=float)
        raise ParameterError("a dirac distribution has no pointwise weight")

    def check_temporal(self) -> None:
        """Reject intervals whose endpoints give physical order exactly 1."""
        ends = (self.at,) if self.is_dirac else (self.lo, self.hi)
        for e in ends:
            if abs(2.0 * e - 1.0) < 1e-14:
                raise ParameterError("temporal half-order interval must avoid 1/2 at its ends")

    def describe(self) -> dict:
        d = {"kind": self.kind, "interval": [self.lo, self.hi]}
        if self.is_dirac:
            d["at"] = self.at
        elif self.kind == "constant":
            d["value"] = self.value
        else:
            d["expr"] = self.expr
        return d


def order_node_arrays(d: OrderDistribution, q: int | None = None) -> tuple[NDArray, NDArray]:
    """Orders and combined weights as arrays (see :func:`order_nodes`)."""
    q = d.quadrature_order if q is None else q
    if int(q) != q or q < 1:
        raise ParameterError(f"order quadrature needs Q >= 1, got {q}")
    if d.is_dirac:
        return np.array([float(d.at)]), np.array([1.0])
    rule = gauss_legendre_rule(int(q))
    orders, w = rule.mapped(d.lo, d.hi)
    weights = w * d(orders)
    if not np.all(np.isfinite(weights)):
        raise ParameterError("distribution weight is not finite at the quadrature nodes")
    return orders, weights


def order_nodes(d: OrderDistribution, q: int | None = None) -> list[OrderNode]:
    """Quadrature nodes over the order interval.

    ``sum(n.weight * g(n.order))`` approximates ``integral d(s) g(s) ds``.
    A dirac distribution yields the single node ``(at, 1)`` regardless of ``q``.
    """
    orders, weights = order_node_arrays(d, q)
    return [OrderNode(float(o), float(w)) for o, w in zip(orders, weights)]


def distributed_integral(d: OrderDistribution, g: Callable[[float], float], q: int | None = None) -> float:
    """Integrate ``g`` against the distribution."""
    orders, weights = order_node_arrays(d, q)
    return float(sum(w * g(float(o)) for o, w in zip(orders, weights)))
