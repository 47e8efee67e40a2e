"""Exception hierarchy shared by every module.

Each class maps onto one of the CLI exit codes (see ``thermoform.cli``).
"""


class ThermoformError(Exception):
    exit_code = 1


class InvalidParameter(ThermoformError, ValueError):
    exit_code = 2


class InvalidSystem(ThermoformError, ValueError):
    exit_code = 2


class InsufficientData(ThermoformError, ValueError):
    exit_code = 2


class NumericFailure(ThermoformError, ArithmeticError):
    """Raised when an iterative solver stops short of its tolerance."""

    exit_code = 3

    def __init__(self, operation, residual, message=None):
        self.operation = operation
        self.residual = residual
        super().__init__(message or f"{operation}: residual {residual:.3e} above tolerance")


class ResourceLimit(ThermoformError, MemoryError):
    exit_code = 4


class StarViolation(ThermoformError):
    """A pulled-back ball fails the homeomorphic-image/contraction test."""

    exit_code = 3

    def __init__(self, time, reason, report=None):
        self.time = time
        self.reason = reason
        self.report = report
        super().__init__(f"time {time}: {reason}")


class EndpointAmbiguity(ThermoformError):
    exit_code = 3
