"""Exception hierarchy shared by all analyses."""

from __future__ import annotations


class StabilityError(Exception):
    """Base class for every error raised by this package."""


class ConstructionError(StabilityError, ValueError):
    """A value object was built from inconsistent data."""


class ConstraintViolation(StabilityError):
    """An Einstein constraint fails beyond tolerance."""

    def __init__(self, equation: str, residual):
        self.equation = equation
        self.residual = residual
        super().__init__(f"constraint {equation} violated: residual {residual}")


class InvalidParams(StabilityError, ValueError):
    pass


class IndexOutOfRange(StabilityError, IndexError):
    pass


class SpanNotTraceFree(StabilityError, ValueError):
    pass


class SpanDependent(StabilityError, ValueError):
    pass


class NotEinstein(StabilityError):
    def __init__(self, residual, tol):
        self.residual = residual
        self.tol = tol
        super().__init__(f"configuration is not Einstein: residual {residual} > {tol}")


class NoSolutionFound(StabilityError):
    def __init__(self, best_residual):
        self.best_residual = best_residual
        super().__init__(f"no Einstein solution found; best residual {best_residual}")


class MRequiresAtLeastThree(StabilityError, ValueError):
    pass


class NotOnSimplex(StabilityError, ValueError):
    pass


class PairingOutOfRange(StabilityError, ValueError):
    pass


class NewtonError(StabilityError):
    def __init__(self, last_iterate, residual_norm, message):
        self.last_iterate = last_iterate
        self.residual_norm = residual_norm
        super().__init__(message)


class MaxIterationsExceeded(NewtonError):
    def __init__(self, last_iterate, residual_norm):
        super().__init__(
            last_iterate, residual_norm,
            f"Newton iteration did not converge (residual {residual_norm:.3e})",
        )


class SingularJacobian(NewtonError):
    def __init__(self, last_iterate, residual_norm):
        super().__init__(last_iterate, residual_norm, "Jacobian is singular at the start point")


class ConfigError(StabilityError):
    """Base for configuration ingestion failures."""


class ParseError(ConfigError):
    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class SchemaError(ConfigError):
    pass
