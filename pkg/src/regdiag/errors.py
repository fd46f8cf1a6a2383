"""Exception types shared across the package."""


class RegdiagError(Exception):
    """Base class. ``code`` is a short machine-readable tag."""

    code = "error"

    def __init__(self, message, code=None):
        super().__init__(message)
        if code is not None:
            self.code = code


class ValidationError(RegdiagError, ValueError):
    """Input violates a documented precondition."""

    code = "invalid-input"


class NumericalError(RegdiagError, ArithmeticError):
    """A computation could not deliver a meaningful result."""

    code = "numerical-failure"
