"""Exception types shared across the package."""


class InvalidParameter(ValueError):
    """A parameter is outside the domain an operation accepts."""


class NumericalFailure(RuntimeError):
    """A numerical routine failed to reach its requested accuracy."""


class SingularityError(ZeroDivisionError):
    """A quantity would be evaluated at a pole (zero gain, zero distance)."""


class CalibrationUnavailable(ValueError):
    """No usable simulation point exists to anchor an analytic overlay."""
