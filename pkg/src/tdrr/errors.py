"""Exception hierarchy shared by the estimators, criteria and CLI."""


class TdrrError(Exception):
    """Base class for all package errors."""


class InputError(TdrrError, ValueError):
    """Malformed or degenerate input data (CLI exit code 2)."""


class DegenerateInputError(InputError):
    pass


class TooManySlicesError(InputError):
    pass


class DimensionTooSmallError(InputError):
    pass


class NumericalError(TdrrError, ArithmeticError):
    """Estimator or criterion failure on valid input (CLI exit code 3)."""


class NotPSDError(NumericalError):
    pass


class InvariantError(NumericalError):
    pass
