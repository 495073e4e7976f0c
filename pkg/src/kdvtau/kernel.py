"""Spectral-measure kernels ``F(x, t) = int exp(8 k^3 t - k x) dmu(k)``.

``F`` solves the linearized equation ``F_t + 8 F_xxx = 0``.  The operator
with kernel ``phi(a, b) = F(a + b + 2x, t)`` on the half line has Fredholm
determinant ``tau(x, t) = det(I + phi)``, and ``u = -2 d_x^2 log tau``
solves ``u_t - 6 u u_x + u_xxx = 0``.

A measure is a finite list of atoms plus an optional density with compact
support inside ``(0, inf)``.  Densities are integrated with their own
Gauss rule, so every computation here sees a finite weighted node set.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import fredholm
from .errors import DivergenceError, InvalidArgumentError, KernelOverflowError
from .quadrature import DEFAULT_NODES, finite_rule, half_line_rule

EXPONENT_GUARD = 700.0
ADMISSIBILITY_NODES = 64


class AdmissibilityWarning(UserWarning):
    """tau was evaluated at a point where the stochastic representation is not certified."""


def _uniform(params):
    height = float(params.get("height", 1.0))
    return lambda k: np.full_like(np.asarray(k, dtype=float), height)


def _cauchy_window(params):
    gamma = float(params["gamma"])
    return lambda k: gamma / (math.pi * (np.asarray(k, dtype=float) ** 2 + gamma**2))


DENSITY_FAMILIES: dict[str, Callable[[dict], Callable[[np.ndarray], np.ndarray]]] = {
    "uniform": _uniform,
    "cauchy-window": _cauchy_window,
}


@dataclass(frozen=True, eq=False)
class Density:
    """Nonnegative density on ``[lo, hi]`` with a Gauss rule of ``nodes`` points.

    Built-in families are serializable; ``Density.custom`` wraps an
    arbitrary callable and is not.
    """

    family: str | None
    params: dict
    support: tuple[float, float]
    nodes: int = 16
    fn: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)

    def __post_init__(self):
        lo, hi = (float(v) for v in self.support)
        if not (0.0 < lo < hi < math.inf):
            raise InvalidArgumentError(f"density support must satisfy 0 < lo < hi < inf, got {self.support}")
        object.__setattr__(self, "support", (lo, hi))
        if self.fn is None:
            if self.family not in DENSITY_FAMILIES:
                raise InvalidArgumentError(f"unknown density family {self.family!r}")
            object.__setattr__(self, "fn", DENSITY_FAMILIES[self.family](dict(self.params)))
        k, _ = self.rule_points()
        if np.any(self(k) < 0):
            raise InvalidArgumentError("density must be nonnegative")

    @classmethod
    def custom(cls, fn, support, nodes: int = 16) -> "Density":
        return cls(None, {}, tuple(support), nodes, fn)

    def __call__(self, k) -> np.ndarray:
        return np.asarray(self.fn(k), dtype=float)

    def rule_points(self, nodes: int | None = None):
        rule = finite_rule(*self.support, nodes or self.nodes)
        return rule.nodes, rule.weights

    def to_dict(self) -> dict:
        if self.family is None:
            raise InvalidArgumentError("custom densities cannot be serialized")
        return {"family": self.family, "params": dict(self.params), "support": list(self.support),
                "nodes": self.nodes}

    @classmethod
    def from_dict(cls, d: dict) -> "Density":
        return cls(d["family"], dict(d.get("params", {})), tuple(d["support"]), int(d.get("nodes", 16)))


@dataclass(frozen=True, eq=False)
class SpectralMeasure:
    atoms: tuple[tuple[float, float], ...] = ()
    density: Density | None = None

    def __post_init__(self):
        atoms = tuple((float(k), float(m)) for k, m in self.atoms)
        for k, m in atoms:
            if not (k > 0 and math.isfinite(k)):
                raise InvalidArgumentError(f"atom location must be positive (no mass at 0), got {k}")
            if not (m > 0 and math.isfinite(m)):
                raise InvalidArgumentError(f"atom weight must be positive, got {m}")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def from_scattering(cls, sd) -> "SpectralMeasure":
        """Atoms ``(k_n, c_n^2)`` of the N-soliton measure."""
        return cls(tuple((float(k), float(c) ** 2) for c, k in zip(sd.c, sd.kappa)))

    @property
    def is_atomic(self) -> bool:
        return self.density is None

    @property
    def is_empty(self) -> bool:
        return not self.atoms and self.density is None

    def discretize(self):
        """Weighted node set ``(kappa, weight)``: atoms exact, density by its rule."""
        k = [np.array([a[0] for a in self.atoms], dtype=float)]
        w = [np.array([a[1] for a in self.atoms], dtype=float)]
        if self.density is not None:
            dk, dw = self.density.rule_points()
            k.append(dk)
            w.append(dw * self.density(dk))
        return np.concatenate(k), np.concatenate(w)

    def to_dict(self) -> dict:
        out = {"atoms": [[k, m] for k, m in self.atoms]}
        if self.density is not None:
            out["density"] = self.density.to_dict()
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "SpectralMeasure":
        density = d.get("density")
        return cls(tuple(tuple(a) for a in d.get("atoms", [])),
                   Density.from_dict(density) if density else None)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "SpectralMeasure":
        return cls.from_dict(json.loads(text))


def _guard(kappa, exponent, x, t):
    if exponent.size and np.max(exponent) > EXPONENT_GUARD:
        i = np.unravel_index(np.argmax(exponent), exponent.shape)
        raise KernelOverflowError(float(np.broadcast_to(kappa, exponent.shape)[i]), x, t, float(exponent[i]))


def F_values(mu: SpectralMeasure, x, t: float) -> np.ndarray:
    """Vectorized ``F(x, t)`` over an array of ``x``."""
    k, w = mu.discretize()
    x = np.asarray(x, dtype=float)
    if k.size == 0:
        return np.zeros_like(x)
    exponent = 8.0 * k**3 * t - k * x[..., None]
    _guard(k, exponent, x, t)
    return np.exp(exponent) @ w


def F_eval(mu: SpectralMeasure, x: float, t: float) -> float:
    return float(F_values(mu, float(x), float(t)))


def linearized_residual(mu: SpectralMeasure, x: float, t: float, h: float = 1e-2) -> float:
    """Second-order central estimate of ``F_t + 8 F_xxx`` at ``(x, t)``."""
    if mu.is_empty:
        return 0.0
    f_t = (F_eval(mu, x, t + h) - F_eval(mu, x, t - h)) / (2.0 * h)
    xs = x + h * np.array([-2.0, -1.0, 1.0, 2.0])
    fm2, fm1, fp1, fp2 = F_values(mu, xs, t)
    f_xxx = (fp2 - 2.0 * fp1 + 2.0 * fm1 - fm2) / (2.0 * h**3)
    return float(f_t + 8.0 * f_xxx)


def _pair_weights(mu, x, t):
    k, w = mu.discretize()
    exponent = 8.0 * k**3 * t - 2.0 * k * x
    _guard(k, exponent, x, t)
    return k, w * np.exp(exponent)


def phi_l2_norm(mu: SpectralMeasure, x: float, t: float) -> float:
    """``||phi_(x,t)||`` in ``L^2(R_+^2)``, from the pairwise closed form."""
    k, r = _pair_weights(mu, x, t)
    if k.size == 0:
        return 0.0
    ksum = k[:, None] + k[None, :]
    terms = np.outer(r, r) / ksum**2
    bad = ~np.isfinite(terms) | (ksum <= 0)
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise DivergenceError(f"pairwise integral diverges for kappa pair ({k[i]}, {k[j]})")
    return math.sqrt(math.fsum(terms.ravel()))


@dataclass(frozen=True)
class AdmissibilityReport:
    near_zero: float
    tail: float
    phi_norm: float
    ok: bool


def admissibility_check(mu: SpectralMeasure, x: float, t: float) -> AdmissibilityReport:
    """Both integrability conditions and the ``||phi|| < 1`` condition at ``(x, t)``.

    ``near_zero = int_(0,1) k^-1 e^{8k^3t-2kx} dmu``,
    ``tail = int_[1,inf) k^-1/2 e^{8k^3t-2kx} dmu``.  Overflow or divergence
    is reported as ``inf`` rather than raised.
    """

    def weight(k):
        e = 8.0 * k**3 * t - 2.0 * k * x
        with np.errstate(over="ignore"):
            return np.where(e > EXPONENT_GUARD, np.inf, np.exp(np.minimum(e, EXPONENT_GUARD)))

    near, tail = [], []
    for k, m in mu.atoms:
        val = m * float(weight(np.array(k)))
        (near if k < 1.0 else tail).append(val / k if k < 1.0 else val / math.sqrt(k))
    if mu.density is not None:
        lo, hi = mu.density.support
        if lo < 1.0:
            r = finite_rule(lo, min(hi, 1.0), ADMISSIBILITY_NODES)
            near.append(float(np.dot(r.weights, mu.density(r.nodes) * weight(r.nodes) / r.nodes)))
        if hi > 1.0:
            r = finite_rule(max(lo, 1.0), hi, ADMISSIBILITY_NODES)
            tail.append(float(np.dot(r.weights, mu.density(r.nodes) * weight(r.nodes) / np.sqrt(r.nodes))))
    near_zero = math.fsum(near) if near else 0.0
    tail_v = math.fsum(tail) if tail else 0.0
    try:
        norm = phi_l2_norm(mu, x, t)
    except (KernelOverflowError, DivergenceError):
        norm = math.inf
    ok = math.isfinite(near_zero) and math.isfinite(tail_v) and norm < 1.0
    return AdmissibilityReport(near_zero, tail_v, norm, ok)


@dataclass(frozen=True, eq=False)
class PoppeKernel:
    """``phi_(x,t)(a, b) = F(a + b + 2x, t)``; symmetric in ``(a, b)``."""

    measure: SpectralMeasure
    x: float
    t: float

    def __call__(self, a, b) -> np.ndarray:
        return F_values(self.measure, np.add(a, b) + 2.0 * self.x, self.t)

    def dx(self, a, b) -> np.ndarray:
        """Analytic x-derivative ``-2 int k e^{8k^3t - k(a+b+2x)} dmu``."""
        k, w = self.measure.discretize()
        arg = np.add(a, b) + 2.0 * self.x
        exponent = 8.0 * k**3 * self.t - k * np.asarray(arg)[..., None]
        _guard(k, exponent, self.x, self.t)
        return -2.0 * (np.exp(exponent) @ (k * w))


def poppe_operator(mu: SpectralMeasure, x: float, t: float, n: int = DEFAULT_NODES,
                   L: float = 1.0) -> fredholm.KernelOperator:
    kern = PoppeKernel(mu, float(x), float(t))
    return fredholm.KernelOperator(kern, half_line_rule(n, L), kernel_dx=kern.dx)


def tau_poppe(mu: SpectralMeasure, x: float, t: float, lam: float = 1.0, n: int = DEFAULT_NODES,
              L: float = 1.0, check: bool = False) -> float:
    """``det(I + lam F_(x,t))`` on ``[0, inf)`` with an ``n``-node mapped Gauss rule.

    With ``check=True`` an :class:`AdmissibilityWarning` is issued when
    :func:`admissibility_check` fails at ``(x, t)``.
    """
    if lam == 0 or mu.is_empty:
        return 1.0
    if check:
        report = admissibility_check(mu, x, t)
        if not report.ok:
            warnings.warn(f"(x, t) = ({x}, {t}) is not admissible: {report}", AdmissibilityWarning,
                          stacklevel=2)
    return fredholm.fredholm_det(poppe_operator(mu, x, t, n, L), lam)
