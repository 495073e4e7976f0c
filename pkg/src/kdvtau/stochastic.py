"""Monte Carlo estimators for the stochastic tau-function representations.

Random streams
--------------
Paths are grouped in blocks of :data:`BLOCK_PATHS`.  Block ``b`` draws its
standard normals from ``PCG64(SeedSequence(seed, spawn_key=(b,)))`` in
path-major order, so increasing ``paths`` never changes earlier paths and
every estimate is a pure function of its inputs and :class:`McConfig`.
Per-path values are reduced with ``math.fsum``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import backend, fredholm
from .errors import (DecompositionError, InvalidArgumentError, PoleError,
                     RepresentationInvalidError)
from .kernel import SpectralMeasure, admissibility_check
from .quadrature import finite_rule
from .soliton import cauchy_covariance

BLOCK_PATHS = 256
CHUNK_VALUES = 4_000_000  # normals held in memory at once
JITTER = 1e-12
F2_NODES = 256


@dataclass(frozen=True)
class McConfig:
    paths: int = 100_000
    steps: int = 2000
    seed: int = 0
    antithetic: bool = False

    def __post_init__(self):
        for name in ("paths", "steps"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                raise InvalidArgumentError(f"{name} must be a positive integer, got {v!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise InvalidArgumentError("seed must be an unsigned 64-bit integer")
        if self.paths < 2:
            raise InvalidArgumentError("at least two paths are needed for a standard error")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "McConfig":
        fields = {k: d[k] for k in ("paths", "steps", "seed", "antithetic") if k in d}
        return cls(**fields)


@dataclass(frozen=True)
class McEstimate:
    """Sample mean with its standard error.

    For complex estimates ``stderr`` combines the component errors as
    ``hypot(stderr_real, stderr_imag)``.
    """

    mean: float | complex
    stderr: float
    paths_used: int
    stderr_real: float | None = None
    stderr_imag: float | None = None

    @classmethod
    def from_samples(cls, samples: np.ndarray) -> "McEstimate":
        samples = np.asarray(samples)
        n = samples.size
        if np.iscomplexobj(samples):
            re = cls.from_samples(samples.real)
            im = cls.from_samples(samples.imag)
            return cls(complex(re.mean, im.mean), math.hypot(re.stderr, im.stderr), n, re.stderr, im.stderr)
        mean = math.fsum(samples) / n
        var = math.fsum((samples - mean) ** 2) / (n - 1)
        se = math.sqrt(var / n)
        return cls(mean, se, n, se, 0.0)

    @property
    def is_complex(self) -> bool:
        return isinstance(self.mean, complex)

    def z_score(self, target: float) -> float:
        err = abs(self.mean - target)
        if self.stderr == 0:
            return 0.0 if err == 0 else math.inf
        if not self.is_complex:
            return (self.mean - target) / self.stderr
        return err / self.stderr

    def within(self, target, k: float = 3.0) -> bool:
        return abs(self.z_score(target)) <= k

    def within_components(self, target: complex, k: float = 3.0) -> bool:
        target = complex(target)
        m = complex(self.mean)
        ok_re = abs(m.real - target.real) <= k * self.stderr_real
        ok_im = abs(m.imag - target.imag) <= k * self.stderr_imag
        return ok_re and ok_im

    def to_dict(self) -> dict:
        if self.is_complex:
            return {"mean": [self.mean.real, self.mean.imag], "stderr": self.stderr,
                    "stderr_real": self.stderr_real, "stderr_imag": self.stderr_imag,
                    "paths_used": self.paths_used}
        return {"mean": self.mean, "stderr": self.stderr, "paths_used": self.paths_used}


def block_generator(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(int(block),))))


def normal_chunks(cfg: McConfig, per_path: tuple[int, ...]):
    """Yield standard-normal arrays of shape ``(k, *per_path)`` covering all paths in order."""
    per = int(np.prod(per_path)) if per_path else 1
    blocks_per_chunk = max(1, CHUNK_VALUES // (per * BLOCK_PATHS))
    n_blocks = -(-cfg.paths // BLOCK_PATHS)
    for b0 in range(0, n_blocks, blocks_per_chunk):
        b1 = min(n_blocks, b0 + blocks_per_chunk)
        p0, p1 = b0 * BLOCK_PATHS, min(cfg.paths, b1 * BLOCK_PATHS)
        out = np.empty((p1 - p0,) + tuple(per_path))
        for b in range(b0, b1):
            lo = b * BLOCK_PATHS - p0
            hi = min(p1, (b + 1) * BLOCK_PATHS) - p0
            block_generator(cfg.seed, b).standard_normal(out=out[lo:hi])
        yield out


def run_mc(cfg: McConfig, per_path: tuple[int, ...], functional: Callable[[np.ndarray], np.ndarray]) -> McEstimate:
    """Evaluate ``functional`` on every chunk of normals and reduce.

    With ``cfg.antithetic`` each sample is ``(f(Z) + f(-Z)) / 2``.
    """
    parts = []
    for z in normal_chunks(cfg, per_path):
        values = functional(z)
        if cfg.antithetic:
            values = 0.5 * (values + functional(np.negative(z)))
        parts.append(values)
    return McEstimate.from_samples(np.concatenate(parts))


@dataclass(frozen=True, eq=False)
class GaussianEnsemble:
    covariance: np.ndarray
    factor: np.ndarray
    jitter: float = 0.0

    @classmethod
    def from_covariance(cls, cov) -> "GaussianEnsemble":
        cov = np.atleast_2d(np.asarray(cov, dtype=float))
        if cov.shape[0] != cov.shape[1] or not np.allclose(cov, cov.T, rtol=0, atol=1e-14 * max(1.0, np.abs(cov).max(initial=0))):
            raise InvalidArgumentError("covariance must be a symmetric square matrix")
        cov = 0.5 * (cov + cov.T)
        try:
            return cls(cov, np.linalg.cholesky(cov), 0.0)
        except np.linalg.LinAlgError:
            pass
        jitter = JITTER * (1.0 + np.linalg.norm(cov, 2))
        try:
            factor = np.linalg.cholesky(cov + jitter * np.eye(cov.shape[0]))
        except np.linalg.LinAlgError as exc:
            raise DecompositionError(f"covariance is not positive semidefinite (jitter {jitter:.3g})") from exc
        return cls(cov, factor, jitter)

    @property
    def dim(self) -> int:
        return self.covariance.shape[0]


def _diag_vector(R, n) -> np.ndarray:
    R = np.asarray(R, dtype=float)
    if R.ndim == 2:
        if np.any(R - np.diag(np.diag(R))):
            raise InvalidArgumentError("R must be diagonal")
        R = np.diag(R)
    R = np.atleast_1d(R)
    if R.size != n:
        raise InvalidArgumentError("R and Lambda dimensions differ")
    return R


def gaussian_quadratic_target(R, cov) -> float:
    """``det(I + R Lambda)^(-1/2)``."""
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    r = _diag_vector(R, cov.shape[0])
    return float(np.linalg.det(np.eye(r.size) + r[:, None] * cov)) ** -0.5


def mc_gaussian_quadratic(R, cov, cfg: McConfig) -> McEstimate:
    """Estimate ``E exp(-X^T R X / 2)`` for ``X ~ N(0, Lambda)``."""
    ens = cov if isinstance(cov, GaussianEnsemble) else GaussianEnsemble.from_covariance(cov)
    r = _diag_vector(R, ens.dim)
    spectrum = np.linalg.eigvalsh(np.eye(ens.dim) + ens.factor.T @ (r[:, None] * ens.factor))
    if np.any(spectrum <= 0):
        raise RepresentationInvalidError(
            f"I + R Lambda has non-positive spectrum (min {spectrum.min():.3g}); expectation may not exist")
    if not np.any(r):
        return McEstimate(1.0, 0.0, cfg.paths, 0.0, 0.0)
    L = ens.factor

    def functional(z):
        x = z @ L.T
        return np.exp(-0.5 * ((x * x) @ r))

    return run_mc(cfg, (ens.dim,), functional)


def cauchy_discretization(mu: SpectralMeasure, x: float, t: float):
    """``(R, Lambda)`` for the Gaussian functional of ``mu`` on its weighted node set."""
    k, w = mu.discretize()
    return w * np.exp(8.0 * k**3 * t - 2.0 * k * x), cauchy_covariance(k)


def mc_tau_cauchy(mu: SpectralMeasure, x: float, t: float, cfg: McConfig,
                  require_admissible: bool = True) -> McEstimate:
    """Estimate ``E exp(-1/2 int e^{8k^3t-2kx} X_k^2 dmu(k))`` with Cauchy-covariance ``X``.

    The expectation equals ``tau(x, t)^(-1/2)``.
    """
    if mu.is_empty:
        return McEstimate(1.0, 0.0, cfg.paths, 0.0, 0.0)
    if require_admissible:
        report = admissibility_check(mu, x, t)
        if not report.ok:
            raise RepresentationInvalidError(f"(x, t) = ({x}, {t}) is not admissible: {report}")
    R, cov = cauchy_discretization(mu, x, t)
    return mc_gaussian_quadratic(R, cov, cfg)


def ou_coefficients(p, dt: float):
    """Exact one-step transition ``xi' = decay * xi + scale * Z`` of ``dxi = dW + p xi ds``."""
    p = np.atleast_1d(np.asarray(p, dtype=float))
    decay = np.exp(p * dt)
    var = np.full_like(p, dt)
    nz = p != 0
    var[nz] = np.expm1(2.0 * p[nz] * dt) / (2.0 * p[nz])
    return decay, np.sqrt(var)


def simulate_ou(p, x_end: float, steps: int, rng: np.random.Generator) -> np.ndarray:
    """One path of the N-dimensional OU process on ``[0, x_end]``, shape ``(steps + 1, N)``."""
    if steps < 100:
        raise InvalidArgumentError("simulate_ou needs at least 100 steps")
    if not x_end > 0:
        raise InvalidArgumentError("x_end must be positive")
    decay, scale = ou_coefficients(p, x_end / steps)
    z = rng.standard_normal((steps, decay.size))
    path = np.zeros((steps + 1, decay.size))
    for k in range(steps):
        path[k + 1] = decay * path[k] + scale * z[k]
    return path


def _check_ou_params(p, c):
    p = np.atleast_1d(np.asarray(p, dtype=float))
    c = np.atleast_1d(np.asarray(c, dtype=float))
    if p.shape != c.shape or p.ndim != 1:
        raise InvalidArgumentError("p and c must be 1-D of equal length")
    if np.any(c <= 0):
        raise InvalidArgumentError("c must be a positive vector")
    if np.unique(p).size != p.size:
        raise InvalidArgumentError("entries of p must be distinct")
    return p, c


def ikeda_taniguchi_mc(p, c, a: float, x: float, cfg: McConfig) -> McEstimate:
    """Estimate ``E exp(-(a^2/2) int_0^x <c, xi_p(y)>^2 dy)`` (the ``t = 0`` case)."""
    p, c = _check_ou_params(p, c)
    if a == 0:
        return McEstimate(1.0, 0.0, cfg.paths, 0.0, 0.0)
    dt = x / cfg.steps
    decay, scale = ou_coefficients(p, dt)
    half_a2 = 0.5 * a * a

    def functional(z):
        integral, _ = backend.ou_quadratic_integral(z, decay, scale, c, dt)
        return np.exp(-half_a2 * integral)

    return run_mc(cfg, (cfg.steps, p.size), functional)


def _e_decomposition(p, c, a):
    D = np.diag(p)
    E = D @ D + a * a * np.outer(c, c)
    r2, U = np.linalg.eigh(E)
    if np.any(r2 <= 0):
        raise DecompositionError(f"E(a) has a non-positive eigenvalue ({r2.min():.3g})")
    return D, np.sqrt(r2), U


def phi_a(p, c, a: float, z: float, t: float) -> np.ndarray:
    """``U {cosh(zeta) - sinh(zeta) R^-1 U^-1 D U} U^-1`` with ``zeta = z R + t R^3``."""
    p, c = _check_ou_params(p, c)
    D, R, U = _e_decomposition(p, c, a)
    zeta = z * R + t * R**3
    inner = np.diag(np.cosh(zeta)) - (np.sinh(zeta) / R)[:, None] * (U.T @ D @ U)
    return U @ inner @ U.T


def ikeda_taniguchi_det(p, c, a: float, x: float, t: float = 0.0) -> float:
    """``(det phi_a(0, t) / det phi_a(x, t))^(1/2) exp(-(x/2) Tr D)``."""
    p, c = _check_ou_params(p, c)
    if x == 0:
        return 1.0
    ratio = np.linalg.det(phi_a(p, c, a, 0.0, t)) / np.linalg.det(phi_a(p, c, a, x, t))
    if not ratio > 0:
        raise DecompositionError(f"det phi_a ratio is not positive ({ratio:.3g})")
    return float(math.sqrt(ratio) * math.exp(-0.5 * x * p.sum()))


def f2_operator(p, c, a: float, x: float, n: int = F2_NODES) -> fredholm.KernelOperator:
    """Operator with kernel ``f2`` on ``[0, x] x {1..N}`` (``t = 0``).

    ``f2((s,i),(u,j)) = a^2 c_i c_j / (p_i + p_j) (e^{(p_i+p_j) x} - e^{(p_i+p_j) max(s,u)}) e^{-p_i s - p_j u}``.
    """
    p, c = _check_ou_params(p, c)
    psum = p[:, None] + p[None, :]
    if np.any(psum == 0):
        raise PoleError("p_i + p_j = 0 for some pair")
    if not x > 0:
        raise InvalidArgumentError("x must be positive")
    a2 = float(a) ** 2

    def kernel(s, i, u, j):
        q = psum[i, j]
        return a2 * c[i] * c[j] / q * (np.exp(q * x) - np.exp(q * np.maximum(s, u))) * np.exp(-p[i] * s - p[j] * u)

    return fredholm.KernelOperator(kernel, finite_rule(0.0, x, n), blocks=p.size,
                                   block_kernel=True)


def f2_trace_closed(p, c, a: float, x: float) -> float:
    """``a^2 sum_i c_i^2 / (4 p_i^2) (e^{2 p_i x} - 2 p_i x - 1)``."""
    p, c = _check_ou_params(p, c)
    return float(a * a * np.sum(c**2 / (4 * p**2) * (np.expm1(2 * p * x) - 2 * p * x)))


def ikeda_taniguchi_fredholm(p, c, a: float, x: float, n: int = F2_NODES) -> float:
    """``det(I + C)^(-1/2)`` for the f2 operator."""
    if a == 0:
        return 1.0
    return fredholm.fredholm_det(f2_operator(p, c, a, x, n)) ** -0.5


def levy_area_target(lam, C) -> complex:
    from .soliton import aihara_det

    return 1.0 / aihara_det(lam, C)


def mc_levy_area(lam, C, cfg: McConfig) -> McEstimate:
    """Estimate ``E exp(S_hat(i))`` for planar Brownian motions on ``[0, 1]``.

    ``S_hat(i) = i (sum l_k S^k + <L C^- L W^1, W^2>) - 1/2 sum_j <L C^+ L W^j, W^j>``
    with ``L = Lambda^(1/2)``, left-point stochastic areas ``S^k`` and
    endpoints ``W^j = (W^{1,j}_1, ..., W^{n,j}_1)``.  The expectation is
    ``det(cosh Lambda + C sinh Lambda)^-1``; a ``+1/2`` in front of the
    ``C^+`` term would give ``det(cosh Lambda - C sinh Lambda)^-1`` instead, as
    conditioning on the endpoints and Levy's area formula show for ``n = 1``.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if lam.ndim == 2:
        lam = np.diag(lam).copy()
    C = np.atleast_2d(np.asarray(C, dtype=float))
    n = lam.size
    if C.shape != (n, n):
        raise InvalidArgumentError("C must be n x n")
    if np.any(lam < 0):
        raise InvalidArgumentError("Lambda entries must be nonnegative")
    if cfg.steps < 500:
        raise InvalidArgumentError("mc_levy_area needs at least 500 steps")
    root = np.sqrt(lam)
    b_minus = root[:, None] * (0.5 * (C - C.T)) * root[None, :]
    b_plus = root[:, None] * (0.5 * (C + C.T)) * root[None, :]
    dt = 1.0 / cfg.steps

    def functional(z):
        s, w = backend.levy_area(z, dt)
        w1, w2 = w[..., 0], w[..., 1]
        imag = s @ lam + np.einsum("pa,ab,pb->p", w2, b_minus, w1)
        real = -0.5 * (np.einsum("pa,ab,pb->p", w1, b_plus, w1) + np.einsum("pa,ab,pb->p", w2, b_plus, w2))
        return np.exp(real + 1j * imag)

    return run_mc(cfg, (cfg.steps, n, 2), functional)


def privault_target(phi) -> float:
    """``det_2(I + phi)^(-1/2) = prod (1 + l)^(-1/2) e^{l/2}``."""
    lam = np.linalg.eigvalsh(np.asarray(phi, dtype=float))
    return float(np.prod((1.0 + lam) ** -0.5 * np.exp(0.5 * lam)))


def finite_dim_privault_check(phi, cfg: McConfig) -> McEstimate:
    """Estimate ``E exp(-(Z^T phi Z - Tr phi) / 2)`` for standard normal ``Z``."""
    phi = np.atleast_2d(np.asarray(phi, dtype=float))
    if phi.shape[0] != phi.shape[1] or not np.allclose(phi, phi.T):
        raise InvalidArgumentError("phi must be symmetric")
    lam = np.linalg.eigvalsh(phi)
    if np.any(lam <= -1):
        raise RepresentationInvalidError(f"phi has an eigenvalue <= -1 ({lam.min():.3g})")
    tr = float(np.trace(phi))

    def functional(z):
        q = np.einsum("pa,ab,pb->p", z, phi, z)
        return np.exp(-0.5 * (q - tr))

    return run_mc(cfg, (phi.shape[0],), functional)
