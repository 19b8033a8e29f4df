"""Exception hierarchy. Each error carries the CLI exit code it maps to."""
from typing import Optional


class StaticIneqError(Exception):
    exit_code = 1


class DomainError(StaticIneqError):
    """Point off the model, radius outside the hemisphere margin, bad parameter."""
    exit_code = 2


class UsageError(StaticIneqError):
    exit_code = 2


class UnsupportedError(StaticIneqError):
    exit_code = 2


class MeshQualityError(StaticIneqError):
    exit_code = 2


class NumericError(StaticIneqError):
    """Solver did not converge."""
    exit_code = 2

    def __init__(self, message: str, iterations: Optional[int] = None):
        super().__init__(message)
        self.iterations = iterations


class HypothesisViolation(StaticIneqError):
    """Mean curvature not positive at some vertex."""
    exit_code = 3

    def __init__(self, message: str, vertex: Optional[int] = None):
        super().__init__(message)
        self.vertex = vertex


class MeshParseError(StaticIneqError):
    exit_code = 4

    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ReportIOError(StaticIneqError):
    exit_code = 4
