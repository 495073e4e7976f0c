"""Exception types raised across the package."""

import numpy as np


class InvalidArgumentError(ValueError):
    """An argument violates an operation's precondition."""


class EvaluationError(ArithmeticError):
    """A kernel or integrand produced non-finite values."""


class KernelOverflowError(OverflowError):
    """An exponent in F(x, t) exceeds the overflow guard."""

    def __init__(self, kappa, x, t, exponent):
        self.kappa, self.x, self.t, self.exponent = kappa, x, t, exponent
        super().__init__(
            f"exponent 8*k^3*t - k*x = {exponent:.6g} exceeds guard "
            f"(kappa={kappa!r}, x={x!r}, t={t!r})"
        )


class DivergenceError(ArithmeticError):
    """A pairwise integral of the Poppe kernel does not converge."""


class SingularMatrixError(np.linalg.LinAlgError):
    """A matrix that must be inverted is numerically singular."""


class SingularResolventError(SingularMatrixError):
    """I + zM is singular, so the resolvent does not exist."""


class DecompositionError(np.linalg.LinAlgError):
    """A factorization required by an operation failed."""


class RepresentationInvalidError(ValueError):
    """The stochastic representation does not apply (expectation may not exist)."""


class PoleError(ZeroDivisionError):
    """A kernel denominator vanishes."""


class DomainError(ValueError):
    """A field value lies outside the domain of the requested transform."""
