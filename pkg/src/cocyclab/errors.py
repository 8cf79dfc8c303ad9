"""Exception types shared across the package."""


class CocycLabError(Exception):
    """Base class for all package errors."""


class InvalidInputError(CocycLabError, ValueError):
    """Arguments violate an operation's preconditions."""


class CapacityError(CocycLabError):
    """A requested computation exceeds a hard size guard."""


class GateError(CocycLabError):
    """A hypothesis that must hold before a probe runs was not met.

    ``reason`` is a short machine-readable tag; ``details`` carries the
    numbers that failed so campaign scripts can log them.
    """

    def __init__(self, reason, message, **details):
        super().__init__(message)
        self.reason = reason
        self.details = details
