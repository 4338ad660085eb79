"""Exception hierarchy shared by every module.

Each class carries an ``exit_code`` so the CLI can map failures to a
category without inspecting messages.
"""


class CircumnavError(Exception):
    exit_code = 1


class ZeroVector(CircumnavError, ValueError):
    """A direction was requested from a vector shorter than the singularity guard."""

    exit_code = 6


class SingularBearing(ZeroVector):
    """An agent sits (numerically) on the estimated centre."""

    exit_code = 6


class NonFiniteState(CircumnavError, FloatingPointError):
    exit_code = 6


class InvariantViolation(CircumnavError):
    exit_code = 5


class InsufficientData(CircumnavError, ValueError):
    exit_code = 8


class EmptyWindow(CircumnavError, ValueError):
    exit_code = 8


class ConfigError(CircumnavError):
    exit_code = 2


class ParseError(ConfigError):
    exit_code = 2


class SchemaError(ConfigError):
    exit_code = 3

    def __init__(self, message, path=()):
        self.path = tuple(path)
        where = "/".join(str(p) for p in self.path) or "<root>"
        super().__init__(f"{where}: {message}")


class ValidationError(ConfigError):
    exit_code = 4


class OutputError(CircumnavError, OSError):
    exit_code = 7
