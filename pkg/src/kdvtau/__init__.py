"""Tau functions of the KdV equation: determinants, kernels and Gaussian expectations.

Submodules
----------
quadrature   Gauss rules on finite and half-infinite intervals
fredholm     Nystrom discretization and Fredholm determinants
soliton      closed-form soliton and Cauchy-type matrix determinants
kernel       spectral measures and the F(s + u + 2x, t) kernel
stochastic   seeded Monte Carlo estimators for the Gaussian representations
pde          finite-difference reconstruction of u and residual checks
cli          the ``kdvtau`` command
"""

from . import backend, fredholm, kernel, pde, quadrature, soliton, stochastic
from .kernel import SpectralMeasure, tau_poppe
from .pde import GridField, GridSpec
from .soliton import ScatteringData, tau_soliton
from .stochastic import McConfig, McEstimate

__version__ = "0.1.0"

__all__ = [
    "backend", "fredholm", "kernel", "pde", "quadrature", "soliton", "stochastic",
    "GridField", "GridSpec", "McConfig", "McEstimate", "ScatteringData", "SpectralMeasure",
    "tau_poppe", "tau_soliton",
]
