"""Exception types shared by every qudit-control module.

Validation problems are ValueError subclasses so callers that already catch
ValueError for bad inputs keep working; numerical failures derive from
RuntimeError.
"""

from typing import Optional


class InvalidDimensionError(ValueError):
    """Raised when a qudit dimension is below 2 or otherwise unusable."""


class ContractViolationError(ValueError):
    """Raised when an input breaks a documented precondition (e.g. non-Hermitian H)."""


class DimensionMismatchError(ValueError):
    """Raised when two operands have incompatible dimensions."""


class DegenerateSpectrumError(ValueError):
    """Raised when a drive tone is exactly resonant with a spectator transition."""


class IntegrationError(RuntimeError):
    """Raised when the master-equation integrator cannot proceed or drifts."""


class FitError(RuntimeError):
    """Raised when a fit is underdetermined."""


class PulseTableError(ValueError):
    """Raised for malformed pulse-table files.

    Attributes:
        path: File the row came from.
        line: 1-based line number of the offending row, if known.
    """

    def __init__(self, message: str, path: str = '<memory>', line: Optional[int] = None):
        self.path = path
        self.line = line
        location = path if line is None else f'{path}:{line}'
        super().__init__(f'{location}: {message}')


class ConfigurationError(ValueError):
    """Raised for missing or invalid configuration entries.

    Attributes:
        key: Dotted name of the offending configuration key.
    """

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f'{key}: {message}')
