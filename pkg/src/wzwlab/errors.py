"""Exception taxonomy shared by all modules.

Every error raised on a contract violation derives from :class:`WzwError`,
so callers (in particular the CLI) can map failure classes to exit codes
without string matching.
"""

from __future__ import annotations


class WzwError(Exception):
    """Base class for all library errors."""


class ConfigError(WzwError):
    """Malformed or out-of-budget experiment configuration."""


class PreconditionError(WzwError):
    """An operation was called on data violating its admission contract."""


class DiastasisSingular(PreconditionError):
    """Polarization evaluated at an antipodal pair (1 + x*conj(y) = 0)."""


class ResolutionError(PreconditionError):
    """Requested grid resolution below the supported minimum."""


class StencilError(PreconditionError):
    """Finite-difference stencil leaves the validity region of both charts."""


class NotOmegaPsh(PreconditionError):
    """Input potential fails the numerical omega-psh admission test."""


class QuadratureTooCoarse(WzwError):
    """Gram matrix assembled from the quadrature failed the PD certificate."""


class SingularGram(PreconditionError):
    """Inner-product matrix is singular / not positive definite."""


class NotPositiveDefinite(PreconditionError):
    """Matrix argument is not Hermitian positive definite."""


class NotFiberwisePsh(PreconditionError):
    """Fiber Hessian (u + psi)_{x xbar} is nonpositive at the query point."""


class DiscOutOfChart(PreconditionError):
    """Holomorphic disc leaves the coordinate chart over its domain."""


class GridMismatch(PreconditionError):
    """Two fields were combined but live on different grids."""


class Unsupported(WzwError):
    """Requested combination (e.g. complexifying an m=2 box) is not shipped."""


class SolverDiverged(WzwError):
    """Relaxation failed to reach the target residual within the budget."""

    def __init__(self, message: str, residual: float, sweeps: int):
        super().__init__(message)
        self.residual = residual
        self.sweeps = sweeps


class InvariantViolation(WzwError):
    """An experiment-level invariant failed beyond its tolerance."""

    def __init__(self, message: str, margin: float, tolerance: float):
        super().__init__(message)
        self.margin = margin
        self.tolerance = tolerance
