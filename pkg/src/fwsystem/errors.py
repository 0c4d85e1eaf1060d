"""Exception hierarchy shared by every module of the package."""


class FWError(Exception):
    """Base class for all package errors."""


class InvalidField(FWError, ValueError):
    """A field contains non-finite values or does not match its grid."""


class InvalidGrid(FWError, ValueError):
    pass


class InvalidMollifier(FWError, ValueError):
    pass


class InvalidSobolevIndex(FWError, ValueError):
    pass


class CFLViolation(FWError):
    """The advective CFL number max|u| dt / dx exceeds the allowed limit."""

    def __init__(self, cfl: float, limit: float):
        super().__init__(f"CFL number {cfl:.4g} exceeds limit {limit:.4g}")
        self.cfl = cfl
        self.limit = limit


class SeedOutsideDomain(FWError, ValueError):
    pass


class NotApplicable(FWError):
    """A breaking criterion cannot be evaluated for the given data."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class InvalidBounds(FWError, ValueError):
    pass


class MismatchedInitialData(FWError, ValueError):
    pass


class SingularityGuard(FWError):
    """The profile touches the pole of cA/(phi - c)."""


class NoConvergence(FWError):
    def __init__(self, message: str, iterations: int = 0, residual: float = float("nan")):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class ParseError(FWError, ValueError):
    """Malformed initial-data expression; ``position`` is a 0-based offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position
