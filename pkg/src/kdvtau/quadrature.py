"""Gauss-Legendre rules on finite and semi-infinite intervals."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidArgumentError

MAX_NODES = 512
DEFAULT_NODES = 64


@dataclass(frozen=True)
class Interval:
    """Integration domain: ``[a, b]`` or, with ``b = inf``, ``[a, inf)``.

    ``scale`` is the map parameter L of the rational map used for the
    semi-infinite case and is ``None`` for finite intervals.
    """

    a: float
    b: float
    scale: float | None = None

    @property
    def finite(self) -> bool:
        return bool(np.isfinite(self.b))


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    domain: Interval

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        weights = np.array(self.weights, dtype=float)
        if nodes.ndim != 1 or nodes.shape != weights.shape:
            raise InvalidArgumentError("nodes and weights must be 1-D and of equal length")
        if nodes.size > 1 and np.any(np.diff(nodes) <= 0):
            raise InvalidArgumentError("nodes must be strictly increasing")
        if np.any(weights <= 0):
            raise InvalidArgumentError("weights must be strictly positive")
        nodes.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return self.nodes.size

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        """Apply the rule to a vectorized integrand."""
        return float(np.dot(self.weights, f(self.nodes)))


def gauss_rule(n: int) -> QuadratureRule:
    """Gauss-Legendre rule with ``n`` nodes on [-1, 1]."""
    if isinstance(n, bool) or int(n) != n or not 1 <= n <= MAX_NODES:
        raise InvalidArgumentError(f"node count must be an integer in [1, {MAX_NODES}], got {n!r}")
    x, w = np.polynomial.legendre.leggauss(int(n))
    # leggauss is symmetric up to rounding; enforce it exactly
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return QuadratureRule(x, w, Interval(-1.0, 1.0))


def _check_reference(rule: QuadratureRule) -> None:
    if rule.domain != Interval(-1.0, 1.0):
        raise InvalidArgumentError("rule must be defined on [-1, 1]")


def map_to_interval(rule: QuadratureRule, a: float, b: float) -> QuadratureRule:
    """Affine image of a reference rule on ``[a, b]``."""
    _check_reference(rule)
    a, b = float(a), float(b)
    if not (np.isfinite(a) and np.isfinite(b)) or a >= b:
        raise InvalidArgumentError(f"need finite a < b, got a={a}, b={b}")
    half = 0.5 * (b - a)
    return QuadratureRule(a + half * (rule.nodes + 1.0), half * rule.weights, Interval(a, b))


def map_semi_infinite(rule: QuadratureRule, L: float = 1.0) -> QuadratureRule:
    """Rule on [0, inf) via s = L (1 + u) / (1 - u).

    The Jacobian 2L / (1 - u)^2 is folded into the weights.  Integrands
    decaying like (1 + s)^(-2 nu) with nu > 1/2 are integrated convergently.
    """
    _check_reference(rule)
    L = float(L)
    if not L > 0 or not np.isfinite(L):
        raise InvalidArgumentError(f"map parameter L must be positive, got {L}")
    u = rule.nodes
    s = L * (1.0 + u) / (1.0 - u)
    w = rule.weights * 2.0 * L / (1.0 - u) ** 2
    return QuadratureRule(s, w, Interval(0.0, np.inf, L))


def finite_rule(a: float, b: float, n: int = DEFAULT_NODES) -> QuadratureRule:
    return map_to_interval(gauss_rule(n), a, b)


def half_line_rule(n: int = DEFAULT_NODES, L: float = 1.0) -> QuadratureRule:
    return map_semi_infinite(gauss_rule(n), L)
