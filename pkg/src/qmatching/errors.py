"""Exception types raised across the package."""


class QMatchingError(Exception):
    """Base class for all package errors."""


class DimensionError(QMatchingError, ValueError):
    """Operands have incompatible shapes."""


class ShapeError(DimensionError):
    """A structural precondition on a matrix (square, hermitian) failed."""


class SingularMatrixError(QMatchingError, ArithmeticError):
    """Raised when inverting a singular matrix.

    The exact determinant (always zero) is kept on ``det`` so callers can
    report it.
    """

    def __init__(self, message, det=None):
        super().__init__(message)
        self.det = det


class NotCompletelyPositiveError(QMatchingError, ValueError):
    """A Choi matrix handed to ``operator_from_choi`` is not PSD."""


class BasisError(QMatchingError, ValueError):
    """Basis vectors are zero or not pairwise orthogonal."""


class DomainError(QMatchingError, ValueError):
    """Input lies outside the mathematical domain of an operation."""


class ResourceLimitError(QMatchingError):
    """A configured size cap was exceeded."""


class DegenerateInputError(QMatchingError, ValueError):
    """The instance is identically zero or otherwise trivial."""


class RankDeficiencyError(QMatchingError, ArithmeticError):
    """A Sinkhorn normalizer ``T(Q)`` or ``T*(P)`` is singular.

    Since ``P`` and ``Q`` stay positive definite, a singular normalizer means
    ``T(I)`` (or ``T*(I)``) is singular, so the operator maps the identity to
    a rank-deficient matrix and cannot be rank non-decreasing.
    """

    def __init__(self, message, side=None, step=None, rank=None):
        super().__init__(message)
        self.side = side
        self.step = step
        self.rank = rank
