"""Exception hierarchy shared by the numerical modules and the CLI."""
from typing import Optional


class CritlineError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class ConfigError(CritlineError):
    exit_code = 2

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class DomainError(CritlineError):
    """Argument or window outside the evaluation domain."""

    exit_code = 3


class DegeneratePointError(DomainError):
    """Point too close to a zero or pole to classify."""


class PhaseTrackError(CritlineError):
    exit_code = 4


class MissedZeroError(CritlineError):
    exit_code = 4

    def __init__(self, function_id: str, t_lo: float, t_hi: float, expected: int, found: int):
        self.function_id = function_id
        self.interval = (t_lo, t_hi)
        self.expected = expected
        self.found = found
        super().__init__(
            f"{function_id}: expected {expected} zeros in [{t_lo:.4f}, {t_hi:.4f}], found {found}"
        )


class BoundarySingularityError(CritlineError):
    exit_code = 4


class NonIntegerWindingError(CritlineError):
    exit_code = 4

    def __init__(self, value: float, rect: Optional[tuple] = None):
        self.value = value
        self.rect = rect
        super().__init__(f"winding {value:.4f} is not within 0.05 of an integer (rect={rect})")


class InsufficientTableError(CritlineError):
    exit_code = 5


class CacheError(CritlineError):
    exit_code = 5
