"""Exception hierarchy shared by all eigenflow modules."""


class EigenflowError(Exception):
    """Base class for every error raised by this package."""


class ZeroColumn(EigenflowError, ValueError):
    pass


class NotSquare(EigenflowError, ValueError):
    pass


class NonFinite(EigenflowError, ValueError):
    pass


class ResidualExceeded(EigenflowError, ArithmeticError):
    pass


class NumericalFailure(EigenflowError, ArithmeticError):
    pass


class NotNormalized(EigenflowError, ValueError):
    pass


class UnsupportedDim(EigenflowError, ValueError):
    pass


class QuadrantViolation(EigenflowError, ValueError):
    pass


class ConstraintViolation(EigenflowError, ValueError):
    pass


class DomainViolation(EigenflowError, ValueError):
    pass


class InsufficientData(EigenflowError, ValueError):
    pass


class NonDecaying(EigenflowError, ValueError):
    pass
