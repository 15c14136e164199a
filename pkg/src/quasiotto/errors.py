"""Exception hierarchy shared across the package."""


class QuasiOttoError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(QuasiOttoError, ValueError):
    """A physical or numerical parameter violates its constraints."""


class TruncationError(QuasiOttoError):
    """The requested tail tolerance cannot be met below the level cap."""


class SingularMapError(QuasiOttoError):
    """The dynamical map is not invertible, so no time-local generator exists."""


class IntegrationError(QuasiOttoError):
    """A numerical integrator failed (step-size underflow, non-finite state)."""


class DimensionError(QuasiOttoError):
    """A truncated Hilbert space exceeds the configured memory bound."""


class DegenerateCycleError(QuasiOttoError):
    """The engine cycle exchanges no energy with the hot bath."""
