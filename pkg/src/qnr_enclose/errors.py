"""Exception hierarchy shared by all modules."""


class QnrEncloseError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameter(QnrEncloseError, ValueError):
    """A scalar or matrix argument violates a documented precondition."""


class NonHermitianInput(InvalidParameter):
    """A matrix that must be Hermitian is not, within tolerance."""


class NotPositiveDefinite(InvalidParameter):
    """A matrix that must be positive definite has a nonpositive pivot or eigenvalue."""


class NotAccretive(InvalidParameter):
    """The Hermitian part of the damping matrix has a negative eigenvalue."""


class ZeroVector(InvalidParameter):
    """A vector that must be nonzero is zero."""


class InsideGap(QnrEncloseError):
    """The abscissa lies inside the spectral-free interval, where a bound is undefined."""


class DidNotConverge(QnrEncloseError, ArithmeticError):
    """An iterative solver exceeded its iteration cap."""
