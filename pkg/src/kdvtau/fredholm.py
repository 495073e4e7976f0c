"""Nyström discretization of integral operators and their determinants.

A :class:`KernelOperator` pairs a kernel with a quadrature rule.  Its
Nyström matrix is symmetrized, ``M_ij = sqrt(w_i w_j) K(s_i, s_j)``, which
has the same spectrum as ``K W`` and keeps symmetric kernels symmetric.

Operators on a product space ``[a, b] x {0, ..., B-1}`` (block-indexed,
Lebesgue times counting measure) are supported by setting ``blocks = B``;
their kernels take ``(s, i, t, j)`` instead of ``(s, t)`` (also for ``B = 1``
when ``block_kernel`` is set) and the node set
is the rule replicated per block, block index varying slowest.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import EvaluationError, InvalidArgumentError, SingularResolventError
from .quadrature import QuadratureRule

DEFAULT_NU = 0.75
MAX_SERIES_ORDER = 8
FD_STEP = 1e-5


class LCNormWarning(UserWarning):
    """Weighted kernel norm does not decay on the node set."""


@dataclass(frozen=True, eq=False)
class KernelOperator:
    """Integral operator ``f -> int K(., y) f(y) dy`` on a rule's domain.

    ``kernel_dx``, when given, is the analytic x-derivative of the kernel for
    operators belonging to an x-dependent family (see
    :func:`log_det_x_derivative`).
    """

    kernel: Callable[..., np.ndarray]
    rule: QuadratureRule
    blocks: int = 1
    kernel_dx: Callable[..., np.ndarray] | None = None
    block_kernel: bool = False

    def __post_init__(self):
        if int(self.blocks) != self.blocks or self.blocks < 1:
            raise InvalidArgumentError(f"blocks must be a positive integer, got {self.blocks!r}")
        if self.blocks > 1:
            object.__setattr__(self, "block_kernel", True)

    def points(self):
        """Flattened node set as ``(nodes, block_labels, weights)``."""
        n = len(self.rule)
        nodes = np.tile(self.rule.nodes, self.blocks)
        labels = np.repeat(np.arange(self.blocks), n)
        weights = np.tile(self.rule.weights, self.blocks)
        return nodes, labels, weights

    def _evaluate(self, kernel, s, i, t, j) -> np.ndarray:
        if self.block_kernel:
            values = kernel(s, i, t, j)
        else:
            values = kernel(s, t)
        values = np.broadcast_to(np.asarray(values, dtype=float), np.broadcast(s, t).shape)
        if not np.all(np.isfinite(values)):
            raise EvaluationError("kernel returned non-finite values on the node set")
        return values

    def matrix(self, kernel=None) -> np.ndarray:
        """Kernel values ``K(s_i, s_j)`` on the flattened node set."""
        s, lab, _ = self.points()
        return self._evaluate(kernel or self.kernel, s[:, None], lab[:, None], s[None, :], lab[None, :])

    def diagonal(self) -> np.ndarray:
        s, lab, _ = self.points()
        return self._evaluate(self.kernel, s, lab, s, lab)


@dataclass(frozen=True, eq=False)
class DiscretizedOperator:
    matrix: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        for name in ("matrix", "nodes", "weights", "labels"):
            arr = np.array(getattr(self, name))
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def is_symmetric(self, atol: float = 1e-14) -> bool:
        m = self.matrix
        scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
        return bool(np.allclose(m, m.T, rtol=0.0, atol=atol * scale))


def _symmetrize_weights(kmat: np.ndarray, weights: np.ndarray) -> np.ndarray:
    r = np.sqrt(weights)
    # outer(r, r) is exactly symmetric, so symmetric kernels stay exactly symmetric
    return np.outer(r, r) * kmat


def lc_norm(op: KernelOperator, nu: float = DEFAULT_NU) -> float:
    """``sup (1+s)^nu (1+t)^nu |A(s,t)|`` over the node set."""
    s, _, _ = op.points()
    g = (1.0 + np.abs(s)) ** nu
    return float(np.max(g[:, None] * np.abs(op.matrix()) * g[None, :]))


def check_lc(op: KernelOperator, nu: float = DEFAULT_NU, kmat: np.ndarray | None = None) -> bool:
    """Warn when the weighted kernel peaks at the outermost nodes.

    Membership in LC_nu is a sufficient condition only, so a violation is
    reported as :class:`LCNormWarning` rather than raised.
    """
    s, _, _ = op.points()
    g = (1.0 + np.abs(s)) ** nu
    kmat = op.matrix() if kmat is None else kmat
    weighted = g[:, None] * np.abs(kmat) * g[None, :]
    outer = np.argsort(s)[-1]
    peak = float(np.max(weighted))
    edge = float(max(np.max(weighted[outer, :]), np.max(weighted[:, outer])))
    ok = peak == 0.0 or edge < 0.5 * peak
    if not ok:
        warnings.warn(
            f"weighted kernel norm (nu={nu}) attains {edge:.3g} at the outermost node "
            f"(peak {peak:.3g}); kernel may not lie in LC_nu",
            LCNormWarning,
            stacklevel=2,
        )
    return ok


def discretize(op: KernelOperator) -> DiscretizedOperator:
    s, lab, w = op.points()
    kmat = op.matrix()
    if not op.rule.domain.finite:
        check_lc(op, kmat=kmat)
    return DiscretizedOperator(_symmetrize_weights(kmat, w), s, w, lab)


def _as_discrete(op) -> DiscretizedOperator:
    return op if isinstance(op, DiscretizedOperator) else discretize(op)


def _det(a: np.ndarray) -> float:
    if a.shape[0] == 0:
        return 1.0
    sign, logdet = np.linalg.slogdet(a)
    return float(sign * math.exp(logdet)) if sign != 0 else 0.0


def fredholm_det(op, z: float = 1.0) -> float:
    """``det(I + z M)`` by LU with partial pivoting."""
    d = _as_discrete(op)
    if z == 0:
        return 1.0
    return _det(np.eye(d.size) + z * d.matrix)


def fredholm_det_eig(op, z: float = 1.0) -> float:
    """``prod(1 + z lambda_i)`` over the eigenvalues of M.

    Independent of :func:`fredholm_det`; uses ``eigvalsh`` for symmetric
    matrices.
    """
    d = _as_discrete(op)
    if d.is_symmetric():
        lam = np.linalg.eigvalsh(d.matrix)
    else:
        lam = np.linalg.eigvals(d.matrix)
    return float(np.real(np.prod(1.0 + z * lam)))


def fredholm_coefficients(op, order: int, method: str = "traces") -> np.ndarray:
    """Coefficients ``d_0..d_order`` of the Fredholm series ``D(z) = sum d_mu z^mu``.

    ``d_mu`` is the mu-fold quadrature of ``det[K(s_a, s_b)]`` divided by
    mu!.  Under a product rule this equals the sum of the principal
    mu-minors of M.  ``method="minors"`` sums those minors literally (only
    feasible for small node sets); ``method="traces"`` obtains them from
    the power traces ``Tr M^k`` by Newton's identities.
    """
    if int(order) != order or order < 1:
        raise InvalidArgumentError(f"order must be a positive integer, got {order!r}")
    if order > MAX_SERIES_ORDER:
        raise InvalidArgumentError(f"order {order} exceeds the factorial-cost guard {MAX_SERIES_ORDER}")
    d = _as_discrete(op)
    m = d.matrix
    coeffs = np.zeros(order + 1)
    coeffs[0] = 1.0
    if method == "traces":
        power = np.eye(d.size)
        p = np.zeros(order + 1)
        for k in range(1, order + 1):
            power = power @ m
            p[k] = np.trace(power)
        for mu in range(1, order + 1):
            acc = 0.0
            for k in range(1, mu + 1):
                acc += (-1) ** (k - 1) * coeffs[mu - k] * p[k]
            coeffs[mu] = acc / mu
    elif method == "minors":
        count = sum(math.comb(d.size, mu) for mu in range(1, order + 1))
        if count > 2_000_000:
            raise InvalidArgumentError(f"{count} principal minors requested; use method='traces'")
        for mu in range(1, min(order, d.size) + 1):
            coeffs[mu] = math.fsum(
                np.linalg.det(m[np.ix_(idx, idx)]) for idx in itertools.combinations(range(d.size), mu)
            )
    else:
        raise InvalidArgumentError(f"unknown method {method!r}")
    return coeffs


def fredholm_det_series(op, z: float, order: int, method: str = "traces") -> float:
    """Fredholm series ``1 + sum_{mu<=order} z^mu d_mu`` truncated at ``order``."""
    coeffs = fredholm_coefficients(op, order, method)
    if z == 0:
        return 1.0
    return float(sum(c * z**mu for mu, c in enumerate(coeffs)))


def trace(op) -> float:
    """``sum_i w_i K(s_i, s_i)``."""
    if isinstance(op, DiscretizedOperator):
        return float(np.trace(op.matrix))
    _, _, w = op.points()
    return float(np.dot(w, op.diagonal()))


def carleman_det2(op, z: float = 1.0) -> float:
    """Carleman-Fredholm determinant ``det(I + zA) exp(-z Tr A)``."""
    if z == 0:
        return 1.0
    d = _as_discrete(op)
    return fredholm_det(d, z) * math.exp(-z * float(np.trace(d.matrix)))


def log_det_x_derivative(family: Callable[[float], KernelOperator], x: float, z: float = 1.0,
                         h: float = FD_STEP) -> float:
    """``Tr(z dM/dx (I + zM)^-1)``, the x-derivative of ``log det(I + zM)``.

    Uses the family's analytic ``kernel_dx`` when present, otherwise a
    central difference of the kernel matrix with step ``h``.
    """
    if z == 0:
        return 0.0
    op = family(x)
    d = discretize(op)
    if op.kernel_dx is not None:
        dm = _symmetrize_weights(op.matrix(op.kernel_dx), d.weights)
    else:
        hi, lo = family(x + h), family(x - h)
        if len(hi.rule) != len(op.rule) or hi.blocks != op.blocks:
            raise InvalidArgumentError("family must keep the same quadrature rule across x")
        dm = _symmetrize_weights((hi.matrix() - lo.matrix()) / (2.0 * h), d.weights)
    a = np.eye(d.size) + z * d.matrix
    if np.linalg.cond(a) > 1.0 / np.finfo(float).eps:
        raise SingularResolventError(f"I + zM is singular at x={x}, z={z}")
    return float(z * np.trace(np.linalg.solve(a, dm)))


def volterra_trace_power(kernel: Callable[[np.ndarray, np.ndarray], np.ndarray], n: int,
                         rule: QuadratureRule) -> float:
    """``Tr M^n`` for a Volterra kernel ``K(v, u)`` supported on ``u <= v``.

    For such kernels the continuum value is 0 for every ``n >= 2``; the
    Nyström value converges to 0 as the rule is refined.
    """
    if int(n) != n or n < 2:
        raise InvalidArgumentError(f"power must be an integer >= 2, got {n!r}")
    op = KernelOperator(kernel, rule)
    kmat = op.matrix()
    s = rule.nodes
    above = s[None, :] > s[:, None]  # u > v
    if np.any(kmat[above] != 0):
        raise InvalidArgumentError("kernel is not of Volterra type: K(v, u) != 0 for some u > v")
    m = _symmetrize_weights(kmat, rule.weights)
    return float(np.trace(np.linalg.matrix_power(m, int(n))))
