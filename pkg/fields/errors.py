# fields/errors.py - Exception hierarchy shared by the field modules and scenarios
from typing import List, Optional, Sequence


class EspaceError(Exception):
    """Base class for every error raised by espace"""

    exit_code = 1


# Configuration -----------------------------------------------------------

class ConfigError(EspaceError):
    exit_code = 2


class ParseError(ConfigError):
    def __init__(self, line: Optional[int], message: str = "malformed config"):
        self.line = line
        super().__init__(message if line is None else f"{message} (line {line})")


class UnknownKey(ConfigError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown config key: {name}")


class MissingSection(ConfigError):
    pass


class InvalidParams(EspaceError):
    """Raised when a ModelParams set breaks one or more invariants"""

    exit_code = 2

    def __init__(self, violations: Sequence = (), message: Optional[str] = None):
        self.violations: List = list(violations)
        if message is None:
            message = "; ".join(str(v) for v in self.violations) or "invalid parameters"
        super().__init__(message)


# Domain / usage ----------------------------------------------------------

class DomainError(EspaceError):
    exit_code = 2


class OutOfDomain(DomainError):
    pass


class BadResolution(DomainError):
    pass


class PeriodMismatch(DomainError):
    pass


class UnsupportedMode(DomainError):
    pass


class ZeroAcceleration(DomainError):
    pass


class InsufficientHistory(DomainError):
    pass


# Numerics ----------------------------------------------------------------

class NumericFailure(EspaceError):
    exit_code = 3


class DegenerateQuartic(NumericFailure):
    pass


class ComplexRoots(NumericFailure):
    pass


class NoSolution(NumericFailure):
    def __init__(self, omega_max: float, message: Optional[str] = None):
        self.omega_max = omega_max
        super().__init__(message or f"no dispersion root bracketed on (0, {omega_max:g}]")


class ConstraintInfeasible(NumericFailure):
    pass


class StabilityViolation(NumericFailure):
    pass


class NonFinite(NumericFailure):
    pass


class SurfaceResonance(NumericFailure):
    pass


class DegenerateDensity(NumericFailure):
    pass


# I/O ---------------------------------------------------------------------

class ArtifactError(EspaceError):
    """Unreadable input files or unwritable output artifacts"""

    exit_code = 4
