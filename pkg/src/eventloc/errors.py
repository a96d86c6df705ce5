"""Exception hierarchy. The CLI maps these onto exit codes."""


class EventlocError(Exception):
    pass


class ValidationError(EventlocError, ValueError):
    """Bad input. ``key`` names the offending parameter when known."""

    def __init__(self, msg: str, key: str | None = None):
        super().__init__(msg)
        self.key = key


class NumericalError(EventlocError, ArithmeticError):
    """A numerical quality requirement could not be met."""


class ResolutionError(NumericalError):
    pass


class CoverageError(NumericalError):
    pass


class SingularityError(NumericalError):
    pass


def require_positive(name: str, value: float) -> float:
    v = float(value)
    if not v > 0 or v != v:
        raise ValidationError(f"{name} must be > 0, got {value!r}", key=name)
    return v
