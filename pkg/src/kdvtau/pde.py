"""Finite-difference reconstruction of ``u`` from ``tau`` and residual checks.

Fields live on a uniform ``(x, t)`` lattice with ``values[i, j]`` at
``(x0 + i dx, t0 + j dt)``.  Every derivative uses a central stencil and
trims the boundary; nothing is extrapolated.  Trimmed fields carry shifted
origins so that coordinates stay exact.

Stencils (weights generated exactly from Taylor conditions):

======================  ==========  =========
quantity                points      order
======================  ==========  =========
first x-derivative      5           4
second x-derivative     5           4
third x-derivative      7           4
fourth x-derivative     9           6
first t-derivative      3 (5)       2 (4)
======================  ==========  =========

The bracketed t-stencil is used by :func:`hirota_residual` and
:func:`hirota_DtDx`.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import DomainError, InvalidArgumentError

CONVENTIONS = {"kdv-minus2": -2.0, "kdv4-minus4": -4.0, "expectation-plus4": 4.0}
CSV_HEADER = ("x0", "dx", "nx", "t0", "dt", "nt")


@lru_cache(maxsize=None)
def central_weights(deriv: int, points: int) -> tuple[float, ...]:
    """Central finite-difference weights on offsets ``-p..p``, ``points = 2p + 1``.

    Solves the Taylor conditions ``sum w_k k^j = j! delta_{j,deriv}`` in exact
    rational arithmetic.
    """
    if points % 2 == 0 or points <= deriv:
        raise InvalidArgumentError(f"need an odd number of points > {deriv}, got {points}")
    p = points // 2
    offsets = list(range(-p, p + 1))
    a = [[Fraction(k) ** j for k in offsets] + [Fraction(math.factorial(deriv) if j == deriv else 0)]
         for j in range(points)]
    # Gauss-Jordan on the augmented Vandermonde system
    for col in range(points):
        piv = next(r for r in range(col, points) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        pv = a[col][col]
        a[col] = [v / pv for v in a[col]]
        for r in range(points):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [v - f * w for v, w in zip(a[r], a[col])]
    return tuple(float(a[r][-1]) for r in range(points))


@dataclass(frozen=True)
class GridSpec:
    x0: float
    dx: float
    nx: int
    t0: float
    dt: float
    nt: int

    def __post_init__(self):
        if not (self.dx > 0 and self.dt > 0):
            raise InvalidArgumentError("grid spacings must be positive")
        if self.nx < 1 or self.nt < 1:
            raise InvalidArgumentError("grid needs at least one point per axis")

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """Parse ``"x0:dx:nx,t0:dt:nt"``."""
        try:
            xs, ts = text.split(",")
            x0, dx, nx = xs.split(":")
            t0, dt, nt = ts.split(":")
            return cls(float(x0), float(dx), int(nx), float(t0), float(dt), int(nt))
        except ValueError as exc:
            raise InvalidArgumentError(f"grid must look like 'x0:dx:nx,t0:dt:nt', got {text!r}") from exc

    def __str__(self) -> str:
        return f"{self.x0!r}:{self.dx!r}:{self.nx},{self.t0!r}:{self.dt!r}:{self.nt}"

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.nx)

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.nt)

    def padded(self, px: int, pt: int = 0) -> "GridSpec":
        return GridSpec(self.x0 - px * self.dx, self.dx, self.nx + 2 * px,
                        self.t0 - pt * self.dt, self.dt, self.nt + 2 * pt)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in CSV_HEADER}


@dataclass(frozen=True, eq=False)
class GridField:
    """Samples ``values[i, j]`` at ``(x0 + i dx, t0 + j dt)``."""

    x0: float
    dx: float
    t0: float
    dt: float
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.size == 0:
            raise InvalidArgumentError("values must be a non-empty nx x nt array")
        if not (self.dx > 0 and self.dt > 0):
            raise InvalidArgumentError("grid spacings must be positive")
        if not np.all(np.isfinite(v)):
            i, j = np.argwhere(~np.isfinite(v))[0]
            raise InvalidArgumentError(f"non-finite value at grid point ({i}, {j})")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        for name in ("x0", "dx", "t0", "dt"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def nx(self) -> int:
        return self.values.shape[0]

    @property
    def nt(self) -> int:
        return self.values.shape[1]

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.nx)

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.nt)

    @property
    def spec(self) -> GridSpec:
        return GridSpec(self.x0, self.dx, self.nx, self.t0, self.dt, self.nt)

    @classmethod
    def from_function(cls, f: Callable[[float, float], float], spec: GridSpec) -> "GridField":
        vals = np.array([[f(x, t) for t in spec.t] for x in spec.x], dtype=float)
        return cls(spec.x0, spec.dx, spec.t0, spec.dt, vals)

    @classmethod
    def from_vectorized(cls, f, spec: GridSpec) -> "GridField":
        """``f(X, T)`` evaluated on meshgrid arrays of shape ``(nx, nt)``."""
        X, T = np.meshgrid(spec.x, spec.t, indexing="ij")
        return cls(spec.x0, spec.dx, spec.t0, spec.dt, np.broadcast_to(f(X, T), X.shape))

    def with_values(self, values, trim_x: int = 0, trim_t: int = 0) -> "GridField":
        return GridField(self.x0 + trim_x * self.dx, self.dx, self.t0 + trim_t * self.dt, self.dt, values)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def index_of(self, x: float, t: float, tol: float = 1e-9) -> tuple[int, int]:
        i = (x - self.x0) / self.dx
        j = (t - self.t0) / self.dt
        ri, rj = round(i), round(j)
        if abs(i - ri) > tol or abs(j - rj) > tol or not (0 <= ri < self.nx and 0 <= rj < self.nt):
            raise InvalidArgumentError(f"({x}, {t}) is not a grid point")
        return int(ri), int(rj)

    def value_at(self, x: float, t: float) -> float:
        return float(self.values[self.index_of(x, t)])

    # serialization

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        w.writerow([repr(self.x0), repr(self.dx), self.nx, repr(self.t0), repr(self.dt), self.nt])
        for row in self.values:
            w.writerow(["%.17g" % v for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "GridField":
        rows = [r for r in csv.reader(io.StringIO(text)) if r]
        if len(rows) < 3 or tuple(h.strip() for h in rows[0]) != CSV_HEADER:
            raise InvalidArgumentError(f"CSV must start with header {','.join(CSV_HEADER)}")
        try:
            x0, dx, nx, t0, dt, nt = rows[1]
            nx, nt = int(nx), int(nt)
            vals = np.array([[float(v) for v in r] for r in rows[2:]], dtype=float)
        except ValueError as exc:
            raise InvalidArgumentError(f"malformed GridField CSV: {exc}") from exc
        if vals.shape != (nx, nt):
            raise InvalidArgumentError(f"CSV declares {nx}x{nt} values but holds {vals.shape}")
        return cls(float(x0), float(dx), float(t0), float(dt), vals)

    def to_dict(self) -> dict:
        return {"x0": self.x0, "dx": self.dx, "nx": self.nx, "t0": self.t0, "dt": self.dt,
                "nt": self.nt, "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "GridField":
        vals = np.asarray(d["values"], dtype=float)
        if vals.shape != (int(d["nx"]), int(d["nt"])):
            raise InvalidArgumentError("values shape does not match nx, nt")
        return cls(d["x0"], d["dx"], d["t0"], d["dt"], vals)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "GridField":
        return cls.from_dict(json.loads(text))


def _require(field: GridField, nx: int, nt: int, what: str):
    if field.nx < nx or field.nt < nt:
        raise InvalidArgumentError(
            f"{what} needs at least {nx} x-points and {nt} t-points, grid has {field.nx} x {field.nt}")


def _diff(v: np.ndarray, axis: int, deriv: int, points: int, h: float) -> np.ndarray:
    """Derivative along ``axis``; the result is shorter by ``points - 1``."""
    w = central_weights(deriv, points)
    n = v.shape[axis] - points + 1
    out = np.zeros(v.shape[:axis] + (n,) + v.shape[axis + 1:])
    for k, wk in enumerate(w):
        if wk != 0.0:
            out = out + wk * np.take(v, np.arange(k, k + n), axis=axis)
    return out / h**deriv


def _crop(v: np.ndarray, have: tuple[int, int], want: tuple[int, int]) -> np.ndarray:
    """Shrink an array already trimmed by ``have`` so it is trimmed by ``want``."""
    ax, at = want[0] - have[0], want[1] - have[1]
    return v[ax:v.shape[0] - ax, at:v.shape[1] - at]


def u_from_tau(tau: GridField, convention: str = "kdv-minus2") -> GridField:
    """``u = const * d_x^2 log tau`` with ``const`` set by ``convention``; trims 2 x-columns."""
    if convention not in CONVENTIONS:
        raise InvalidArgumentError(f"unknown convention {convention!r}; choose from {sorted(CONVENTIONS)}")
    _require(tau, 5, 1, "u_from_tau")
    bad = tau.values <= 0
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise DomainError(f"tau <= 0 at grid point ({i}, {j}), (x, t) = ({tau.x[i]}, {tau.t[j]})")
    d2 = _diff(np.log(tau.values), 0, 2, 5, tau.dx)
    return tau.with_values(CONVENTIONS[convention] * d2, trim_x=2)


def _evolution_terms(u: GridField):
    halo = (3, 1)
    v = u.values
    u_t = _crop(_diff(v, 1, 1, 3, u.dt), (0, 1), halo)
    u_x = _crop(_diff(v, 0, 1, 5, u.dx), (2, 0), halo)
    u_xxx = _crop(_diff(v, 0, 3, 7, u.dx), (3, 0), halo)
    return _crop(v, (0, 0), halo), u_t, u_x, u_xxx


def kdv_residual(u: GridField) -> GridField:
    """``u_t - 6 u u_x + u_xxx``; trims 3 x-columns and 1 t-column per side."""
    _require(u, 7, 3, "kdv_residual")
    uc, u_t, u_x, u_xxx = _evolution_terms(u)
    return u.with_values(u_t - 6.0 * uc * u_x + u_xxx, 3, 1)


def kdv4_residual(u: GridField) -> GridField:
    """``u_t - 3/2 u u_x - 1/4 u_xxx``; trims like :func:`kdv_residual`."""
    _require(u, 7, 3, "kdv4_residual")
    uc, u_t, u_x, u_xxx = _evolution_terms(u)
    return u.with_values(u_t - 1.5 * uc * u_x - 0.25 * u_xxx, 3, 1)


def hirota_bilinear(tau: GridField) -> GridField:
    """``tau tau_xt - tau_x tau_t + tau tau_xxxx - 4 tau_x tau_xxx + 3 tau_xx^2``.

    Trims 4 x-columns and 2 t-columns per side.
    """
    _require(tau, 9, 5, "hirota_residual")
    halo = (4, 2)
    v = tau.values
    t_x_full = _diff(v, 0, 1, 5, tau.dx)                                   # trimmed (2, 0)
    t_xt = _crop(_diff(t_x_full, 1, 1, 5, tau.dt), (2, 2), halo)
    t_x = _crop(t_x_full, (2, 0), halo)
    t_t = _crop(_diff(v, 1, 1, 5, tau.dt), (0, 2), halo)
    t_xx = _crop(_diff(v, 0, 2, 5, tau.dx), (2, 0), halo)
    t_xxx = _crop(_diff(v, 0, 3, 7, tau.dx), (3, 0), halo)
    t_xxxx = _crop(_diff(v, 0, 4, 9, tau.dx), (4, 0), halo)
    c = _crop(v, (0, 0), halo)
    h = c * t_xt - t_x * t_t + c * t_xxxx - 4.0 * t_x * t_xxx + 3.0 * t_xx**2
    return tau.with_values(h, 4, 2)


def hirota_residual(tau: GridField, scale: float = 1.0) -> GridField:
    """Bilinear residual divided pointwise by ``max(1, tau^2 * scale)``."""
    h = hirota_bilinear(tau)
    c = _crop(tau.values, (0, 0), (4, 2))
    return h.with_values(h.values / np.maximum(1.0, c**2 * scale))


def hirota_DtDx(a: GridField, b: GridField) -> GridField:
    """``a_xt b + a b_xt - a_t b_x - a_x b_t``; trims 2 columns per side on both axes."""
    if a.values.shape != b.values.shape or not np.allclose(
            [a.x0, a.dx, a.t0, a.dt], [b.x0, b.dx, b.t0, b.dt], rtol=1e-12, atol=1e-15):
        raise InvalidArgumentError("hirota_DtDx needs fields on the same grid")
    _require(a, 5, 5, "hirota_DtDx")
    halo = (2, 2)

    def parts(f):
        v = f.values
        fx = _diff(v, 0, 1, 5, f.dx)
        fxt = _diff(fx, 1, 1, 5, f.dt)
        return (_crop(v, (0, 0), halo), _crop(fx, (2, 0), halo),
                _crop(_diff(v, 1, 1, 5, f.dt), (0, 2), halo), fxt)

    a0, ax, at, axt = parts(a)
    b0, bx, bt, bxt = parts(b)
    return a.with_values(axt * b0 + a0 * bxt - at * bx - ax * bt, 2, 2)


def relative_residual(residual: GridField, scale: GridField) -> GridField:
    """``residual / max(1, |scale|)`` on the residual's grid."""
    ix, it = scale.index_of(residual.x0, residual.t0)
    s = scale.values[ix:ix + residual.nx, it:it + residual.nt]
    if s.shape != residual.values.shape:
        raise InvalidArgumentError("scale field does not cover the residual grid")
    return residual.with_values(residual.values / np.maximum(1.0, np.abs(s)))


def common_points(coarse: GridField, fine: GridField, tol: float = 1e-9):
    """Values of both fields at the coarse points that are also fine points."""
    rx, rt = coarse.dx / fine.dx, coarse.dt / fine.dt
    if abs(rx - round(rx)) > tol or abs(rt - round(rt)) > tol:
        raise InvalidArgumentError("fine spacing must divide the coarse spacing")
    fi = (coarse.x - fine.x0) / fine.dx
    fj = (coarse.t - fine.t0) / fine.dt
    ok_i = (np.abs(fi - np.round(fi)) < tol) & (np.round(fi) >= 0) & (np.round(fi) < fine.nx)
    ok_j = (np.abs(fj - np.round(fj)) < tol) & (np.round(fj) >= 0) & (np.round(fj) < fine.nt)
    if not ok_i.any() or not ok_j.any():
        raise InvalidArgumentError("grids share no points")
    ci, cj = np.nonzero(ok_i)[0], np.nonzero(ok_j)[0]
    fi_idx, fj_idx = np.round(fi[ci]).astype(int), np.round(fj[cj]).astype(int)
    return coarse.values[np.ix_(ci, cj)], fine.values[np.ix_(fi_idx, fj_idx)]


def convergence_order(coarse: GridField, fine: GridField) -> float:
    """``log(max|r_coarse| / max|r_fine|) / log(dx_coarse / dx_fine)`` over shared points.

    ``nan`` when both residuals vanish.
    """
    c, f = common_points(coarse, fine)
    ec, ef = float(np.max(np.abs(c))), float(np.max(np.abs(f)))
    if ec == 0 and ef == 0:
        return math.nan
    if ef == 0:
        return math.inf
    return math.log(ec / ef) / math.log(coarse.dx / fine.dx)
