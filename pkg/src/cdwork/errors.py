"""Exception and warning types shared across the package."""


class CdworkError(Exception):
    """Base class for all package errors."""


class NonHermitianInput(CdworkError):
    """An operator failed its Hermiticity check."""


class DegeneracyError(CdworkError):
    """A degenerate eigenpair is coupled by the drive, so the
    counterdiabatic term is undefined there."""


class StepNotConverged(CdworkError):
    """Time stepping failed the step-halving convergence contract."""


class TruncationError(CdworkError):
    """The truncated basis is too small for the requested computation."""


class QuadratureNotConverged(CdworkError):
    """Adaptive quadrature exceeded its node or depth budget."""


class NotAState(CdworkError):
    """A matrix failed the density-operator checks (trace one, PSD)."""


class InvalidDetuning(CdworkError):
    """The requested frequency ramp is not reachable at the given
    sideband detuning (the laser-induced potential would flip sign)."""


class SupercriticalDrive(CdworkError):
    """The closed-form driven-oscillator eigensystem does not exist
    because the drive ratio reaches or exceeds one."""


class ProtocolError(CdworkError):
    """A parameter path violates the protocol contract."""


class ConfigError(CdworkError):
    """Invalid or unknown run-configuration input."""


class DegenerateGaugeWarning(UserWarning):
    """Two eigenvalues are close enough that the phase gauge, while
    still fixed deterministically, may be unstable under perturbation."""


class ValidityWarning(UserWarning):
    """A physical validity constraint is only marginally satisfied."""
