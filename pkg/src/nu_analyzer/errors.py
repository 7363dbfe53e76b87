"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when an input violates a documented precondition.

    The CLI maps this to exit code 2; everything else is an internal error.
    """
