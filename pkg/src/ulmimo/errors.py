"""Exception types shared by every module."""


class SchedulingError(Exception):
    """Base class for library errors."""


class InvalidArgument(SchedulingError, ValueError):
    pass


class CapacityError(SchedulingError):
    """An exhaustive routine was asked to exceed its configured size cap."""


class NumericError(SchedulingError, ArithmeticError):
    """Non-finite inputs or a matrix that failed to factor."""
