"""Closed-form matrix tau functions.

Two normalizations coexist and are kept apart:

* ``u_t - 6 u u_x + u_xxx = 0`` uses :func:`soliton_matrix`
  ``A_nm = delta_nm + c_n^2 exp(-(k_m + k_n) x + 8 k_n^3 t) / (k_m + k_n)``
  and ``u = -2 d_x^2 log det A``.
* ``u_t = 3/2 u u_x + 1/4 u_xxx`` uses :func:`kdv4_soliton_matrix`
  ``G_ij = sqrt(m_i m_j) exp(-(e_i + e_j) x - (e_i^3 + e_j^3) t) / (e_i + e_j)``
  and ``u = 2 d_x^2 log det(I + G)``.

``ScatteringData`` feeds both through ``m_n = c_n^2`` and ``e_n = k_n``;
the time variables of the two equations are not identified.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidArgumentError, SingularMatrixError

MAX_HIERARCHY = 16


@dataclass(frozen=True, eq=False)
class ScatteringData:
    """Soliton amplitudes ``c`` and wavenumbers ``kappa`` (both positive)."""

    c: np.ndarray = field(default_factory=lambda: np.zeros(0))
    kappa: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.c, dtype=float)).copy()
        k = np.atleast_1d(np.asarray(self.kappa, dtype=float)).copy()
        if c.shape != k.shape or c.ndim != 1:
            raise InvalidArgumentError("c and kappa must be 1-D of equal length")
        if np.any(c <= 0) or np.any(k <= 0):
            raise InvalidArgumentError("amplitudes and wavenumbers must be positive")
        if np.unique(k).size != k.size:
            raise InvalidArgumentError("wavenumbers must be pairwise distinct")
        c.flags.writeable = False
        k.flags.writeable = False
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "kappa", k)

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence[float]]) -> "ScatteringData":
        pairs = list(pairs)
        if not pairs:
            return cls()
        c, k = zip(*pairs)
        return cls(np.array(c), np.array(k))

    def pairs(self) -> list[list[float]]:
        return [[float(a), float(b)] for a, b in zip(self.c, self.kappa)]

    @property
    def size(self) -> int:
        return self.c.size


@dataclass(frozen=True, eq=False)
class KpScatteringData:
    """KP soliton data ``p, q, m`` and hierarchy times ``x_1, ..., x_K``."""

    p: np.ndarray
    q: np.ndarray
    m: np.ndarray
    times: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        p, q, m = (np.atleast_1d(np.asarray(v, dtype=float)) for v in (self.p, self.q, self.m))
        times = np.atleast_1d(np.asarray(self.times, dtype=float))
        if not p.shape == q.shape == m.shape or p.ndim != 1:
            raise InvalidArgumentError("p, q, m must be 1-D of equal length")
        if np.any(m <= 0):
            raise InvalidArgumentError("m must be positive")
        if times.size > MAX_HIERARCHY:
            raise InvalidArgumentError(f"at most {MAX_HIERARCHY} hierarchy times are supported")
        if p.size and np.any(p[:, None] == q[None, :]):
            raise InvalidArgumentError("p_i = q_j for some i, j: Cauchy denominator vanishes")
        for name, v in (("p", p), ("q", q), ("m", m), ("times", times)):
            object.__setattr__(self, name, v)


def soliton_matrix(sd: ScatteringData, x: float, t: float) -> np.ndarray:
    k, c2 = sd.kappa, sd.c**2
    ksum = k[:, None] + k[None, :]
    # row n carries the time factor exp(8 k_n^3 t)
    g = (c2 * np.exp(8.0 * k**3 * t))[:, None] * np.exp(-ksum * x) / ksum
    return np.eye(sd.size) + g


def _det(a: np.ndarray) -> float:
    return 1.0 if a.shape[0] == 0 else float(np.linalg.det(a))


def tau_soliton(sd: ScatteringData, x: float, t: float) -> float:
    return _det(soliton_matrix(sd, x, t))


def cauchy_covariance(kappa) -> np.ndarray:
    """Cauchy matrix ``1 / (k_m + k_n)``, the covariance of ``int e^{-k s} dW_s``."""
    k = np.atleast_1d(np.asarray(kappa, dtype=float))
    if np.any(k <= 0):
        raise InvalidArgumentError("kappa must be positive")
    if np.unique(k).size != k.size:
        raise InvalidArgumentError("kappa must be pairwise distinct")
    return 1.0 / (k[:, None] + k[None, :])


def gaussian_weights(sd: ScatteringData, x: float, t: float) -> np.ndarray:
    """Diagonal of ``R = diag(c_n^2 exp(8 k_n^3 t - 2 k_n x))``."""
    k = sd.kappa
    return sd.c**2 * np.exp(8.0 * k**3 * t - 2.0 * k * x)


def tau_gaussian_closed(sd: ScatteringData, x: float, t: float) -> float:
    """``det(I + R Lambda)``; the Gaussian expectation is its inverse square root."""
    if sd.size == 0:
        return 1.0
    r = gaussian_weights(sd, x, t)
    return _det(np.eye(sd.size) + r[:, None] * cauchy_covariance(sd.kappa))


def kdv4_soliton_matrix(m, eta, x: float, t: float) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    eta = np.asarray(eta, dtype=float)
    esum = eta[:, None] + eta[None, :]
    e3 = eta[:, None] ** 3 + eta[None, :] ** 3
    return np.sqrt(np.outer(m, m)) / esum * np.exp(-esum * x - e3 * t)


def tau_kdv4_soliton(sd: ScatteringData, x: float, t: float) -> float:
    """``det(I + G)`` for the ``u_t = 3/2 u u_x + 1/4 u_xxx`` normalization."""
    if sd.size == 0:
        return 1.0
    return _det(np.eye(sd.size) + kdv4_soliton_matrix(sd.c**2, sd.kappa, x, t))


def kp_phases(kpd: KpScatteringData) -> np.ndarray:
    """``xi_i = sum_l (p_i^l - q_i^l) x_l``."""
    l = np.arange(1, kpd.times.size + 1)
    return ((kpd.p[:, None] ** l - kpd.q[:, None] ** l) * kpd.times[None, :]).sum(axis=1)


def kp_soliton_matrix(kpd: KpScatteringData) -> np.ndarray:
    xi = kp_phases(kpd)
    return np.sqrt(np.outer(kpd.m, kpd.m)) / (kpd.p[:, None] - kpd.q[None, :]) * np.exp(
        -0.5 * (xi[:, None] + xi[None, :])
    )


def kp_soliton_tau(kpd: KpScatteringData) -> float:
    n = kpd.p.size
    if n == 0:
        return 1.0
    return _det(np.eye(n) + kp_soliton_matrix(kpd))


def _diag_entries(lam) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    if lam.ndim == 2:
        if np.any(lam - np.diag(np.diag(lam))):
            raise InvalidArgumentError("Lambda must be diagonal")
        return np.diag(lam).copy()
    return np.atleast_1d(lam)


def aihara_det(lam, C) -> float:
    """``det(cosh(Lambda) + C sinh(Lambda))`` for diagonal ``Lambda``."""
    d = _diag_entries(lam)
    C = np.atleast_2d(np.asarray(C, dtype=float))
    if d.size == 0:
        return 1.0
    return _det(np.diag(np.cosh(d)) + C * np.sinh(d)[None, :])


def cayley_C(P, return_cond: bool = False):
    """Cayley transform ``(I - P)(I + P)^-1``; it is its own inverse."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    eye = np.eye(P.shape[0])
    a = eye + P
    cond = float(np.linalg.cond(a))
    if not np.isfinite(cond) or cond > 1.0 / np.finfo(float).eps:
        raise SingularMatrixError(f"I + P is singular (condition number {cond:.3g})")
    # (I - P)(I + P)^-1 = ((I + P)^-T (I - P)^T)^T
    C = np.linalg.solve(a.T, (eye - P).T).T
    return (C, cond) if return_cond else C


def aihara_factorized(P, lam) -> float:
    """``2^-n det(I + C) e^{Tr Lambda} det(I + P e^{-2 Lambda})`` with ``C = cayley_C(P)``.

    Equals :func:`aihara_det` ``(Lambda, cayley_C(P))``.  With
    ``Lambda = (xi - log m) / 2`` the exponential factor is
    ``exp(sum (xi_i - log m_i) / 2)``.
    """
    d = _diag_entries(lam)
    P = np.atleast_2d(np.asarray(P, dtype=float))
    n = d.size
    C = cayley_C(P)
    return 2.0**-n * _det(np.eye(n) + C) * float(np.exp(d.sum())) * _det(np.eye(n) + P * np.exp(-2.0 * d)[None, :])


def kp_aihara_data(kpd: KpScatteringData):
    """``(P, Lambda, C)`` with ``P = 1/(p_i - q_j)``, ``Lambda = (xi - log m)/2``."""
    P = 1.0 / (kpd.p[:, None] - kpd.q[None, :])
    lam = 0.5 * (kp_phases(kpd) - np.log(kpd.m))
    return P, lam, cayley_C(P)


def kdv_aihara_data(eta, m, x: float, t: float):
    """Stochastic-area data ``Lambda_i = e_i x + e_i^3 t - log(m_i)/2`` and ``C`` for KdV."""
    eta = np.asarray(eta, dtype=float)
    m = np.asarray(m, dtype=float)
    P = cauchy_covariance(eta)
    lam = eta * x + eta**3 * t - 0.5 * np.log(m)
    return P, lam, cayley_C(P)


def u_soliton(sd: ScatteringData, x: float, t: float) -> float:
    """``-2 d_x^2 log det A`` without finite differences.

    With ``B = A^-1 A_x``: ``d_x^2 log det A = Tr(A^-1 A_xx) - Tr(B^2)``, and the
    x-derivatives of ``A - I`` just multiply entrywise by ``-(k_m + k_n)``.
    """
    if sd.size == 0:
        return 0.0
    a = soliton_matrix(sd, x, t)
    ksum = sd.kappa[:, None] + sd.kappa[None, :]
    g = a - np.eye(sd.size)
    b = np.linalg.solve(a, -ksum * g)
    c = np.linalg.solve(a, ksum**2 * g)
    return float(-2.0 * (np.trace(c) - np.trace(b @ b)))
