"""Exception types shared across the package."""

from __future__ import annotations


class TwoChanError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParamsError(TwoChanError, ValueError):
    """A parameter is outside its documented domain."""


class InstanceFormatError(InvalidParamsError):
    """A file does not match its documented schema.

    The message names the offending file, line, or field.
    """


class NotHermitianError(TwoChanError):
    """A matrix required to be Hermitian is not, beyond tolerance."""


class SingularMatrixError(TwoChanError):
    """A linear system is numerically singular."""


class EmptySpectrumError(TwoChanError):
    """A spectral distance was requested for an empty eigenvalue set."""


class ConvergenceFailureError(TwoChanError):
    """An underlying matrix decomposition failed to converge."""


class ResolventSingularError(TwoChanError):
    """A resolvent was evaluated too close to the spectrum."""

    def __init__(self, message: str, mu: complex | None = None):
        super().__init__(message)
        self.mu = mu


class InadmissibleError(TwoChanError):
    """The coupling norm violates the contraction bound and no override was given."""

    def __init__(self, message: str, b_norm: float, bound: float):
        super().__init__(message)
        self.b_norm = b_norm
        self.bound = bound


class NotConvergedError(TwoChanError):
    """The fixed-point iteration exhausted its iteration budget."""

    def __init__(self, message: str, iterations: int, last_residual: float):
        super().__init__(message)
        self.iterations = iterations
        self.last_residual = last_residual


class DivergedError(TwoChanError):
    """A fixed-point iterate escaped the divergence guard."""

    def __init__(self, message: str, iterations: int, norm: float):
        super().__init__(message)
        self.iterations = iterations
        self.norm = norm


class NonRealSpectrumError(TwoChanError):
    """A decoupled channel produced eigenvalues with imaginary parts beyond tolerance."""

    def __init__(self, message: str, max_imag: float):
        super().__init__(message)
        self.max_imag = max_imag


class IncompleteEigensystemError(TwoChanError):
    """Fewer eigenpairs than the channel dimension were available."""
