"""Exception types shared across the package."""

from __future__ import annotations


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class OutsideCone(DomainError):
    """Point is not in the open interior of the requested cone."""


class InconsistentJet(ValueError):
    """A supplied scalar jet does not match the evaluation point."""


class ScalarMatrix(ValueError):
    """Generator is (numerically) a multiple of the identity."""


class DegenerateSpectrum(ValueError):
    """Eigenvalue clustering is ambiguous at the working tolerance."""

    def __init__(self, message: str, gap: float):
        super().__init__(message)
        self.gap = gap


class ConvergenceError(RuntimeError):
    """Iterative solve failed to converge; carries diagnostics."""


class QuadratureFailure(RuntimeError):
    """Adaptive quadrature could not reach the requested tolerance."""

    def __init__(self, message: str, value: float, error_estimate: float):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate


class BlowUp(RuntimeError):
    """ODE trajectory escapes to infinity at a finite time.

    Carries the estimated escape time and the partial trajectory.
    """

    def __init__(self, message: str, tau_star: float, trajectory=None):
        super().__init__(message)
        self.tau_star = tau_star
        self.trajectory = trajectory


class LeftAdmissibleRegion(RuntimeError):
    """ODE trajectory left the region where the first integral is valid."""

    def __init__(self, message: str, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class EmptyMesh(ValueError):
    """Mesh export requested for a mesh with no vertices."""
