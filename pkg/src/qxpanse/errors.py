"""Exception types raised by the simulation pipeline."""


class QxpanseError(Exception):
    """Base class for all package errors."""


class ParameterError(QxpanseError):
    """Invalid physical or numerical parameter."""


class ConfigError(QxpanseError):
    """Malformed or inconsistent run configuration."""


class DivergedTrajectoryError(QxpanseError):
    """A classical trajectory left the trusted numerical range."""

    def __init__(self, message, indices=None, time=None):
        super().__init__(message)
        self.indices = indices
        self.time = time


class SymplecticityError(QxpanseError):
    """Flow Jacobian determinant drifted away from one."""


class AssemblyError(QxpanseError):
    """Non-finite coefficients encountered while building the operator."""


class StepTooLargeError(QxpanseError):
    """Matrix-exponential series did not converge within the term cap."""


class InstabilityError(QxpanseError):
    """Wigner vector became non-finite during time stepping."""

    def __init__(self, message, step=None, time=None):
        super().__init__(message)
        self.step = step
        self.time = time


class DegenerateStateError(QxpanseError):
    """Wigner field has (numerically) zero norm."""


class NoInterferenceError(QxpanseError):
    """Position marginal has fewer than two resolvable peaks."""


class FormatError(QxpanseError):
    """Corrupt or unrecognized file content."""

    def __init__(self, message, offset=None):
        super().__init__(message)
        self.offset = offset


class ResolutionError(QxpanseError):
    """Oracle grid does not resolve the evolving state."""
