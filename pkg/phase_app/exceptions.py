"""
Exception hierarchy for the phase metrology simulator.

Every error raised by the library derives from PhaseMetrologyError so that
callers (the sweep harness, management commands) can catch the whole family
in one place. Precondition failures are also ValueErrors, which keeps them
compatible with code that only knows about the builtin.
"""


class PhaseMetrologyError(Exception):
    """Base exception for phase metrology errors."""


class ConfigurationError(PhaseMetrologyError):
    """Raised when an experiment configuration is invalid or incomplete."""


class PreconditionError(PhaseMetrologyError, ValueError):
    """Raised when an operation is called outside its stated preconditions."""


class AliasingError(PreconditionError):
    """Raised when a wavenumber cutoff reaches the grid's Nyquist limit."""


class GridMismatchError(PreconditionError):
    """Raised when two grid functions do not share the same grid."""


class SpectrumError(PreconditionError):
    """Raised when a spectrum cannot represent a real function."""


class PostselectionError(PhaseMetrologyError):
    """Raised when the low-wavenumber projection has vanishing probability."""


class TomographyError(PreconditionError):
    """Raised when tomography is underdetermined for the available copies."""


class RestrictionError(PreconditionError):
    """Raised when a method is asked to work outside its documented range."""


class InsufficientDataError(PhaseMetrologyError):
    """Raised when a fit has too few distinct resource values."""
