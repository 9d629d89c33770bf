"""Exception types raised by the simulator."""


class DiodeError(Exception):
    """Base class for simulator errors."""


class DegenerateAngleError(DiodeError, ValueError):
    """omega_r = g = 0 leaves the mixing angle undefined."""


class DegenerateSteadyStateError(DiodeError):
    """The generator has more than one (or no) stationary direction."""

    def __init__(self, message, null_vectors, nullspace_dim, residual=float("nan")):
        super().__init__(message)
        self.null_vectors = null_vectors
        self.nullspace_dim = nullspace_dim
        self.residual = residual


class InfeasibleSteadyStateError(DiodeError):
    """The null vector cannot be normalized to a positive density matrix."""

    def __init__(self, message, nullspace_dim=1, residual=float("nan")):
        super().__init__(message)
        self.nullspace_dim = nullspace_dim
        self.residual = residual


class StepSizeError(DiodeError, ValueError):
    """RK4 step violates the stability guard."""


class ConsistencyError(DiodeError):
    """A quantity that must be real/consistent is not, beyond tolerance."""


class UnsupportedConfigurationError(DiodeError, ValueError):
    """Closed-form expressions requested for overlapping baths."""


class UndefinedRectificationError(DiodeError, ValueError):
    """Rectification factor is 0/0 (or the currents do not oppose)."""


class ParseError(DiodeError, ValueError):
    def __init__(self, message, key=None, line=None):
        where = []
        if key is not None:
            where.append(f"key {key!r}")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.key = key
        self.line = line
