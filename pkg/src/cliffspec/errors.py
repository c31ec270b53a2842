"""Exception types shared across the package."""


class CliffspecError(Exception):
    """Base class for all library errors."""


class DimensionMismatchError(CliffspecError, ValueError):
    pass


class SingularVectorError(CliffspecError, ZeroDivisionError):
    pass


class NotInvertibleError(CliffspecError, ArithmeticError):
    pass


class NotInTnError(CliffspecError, ValueError):
    """Raised when a*conj(a) is not a scalar, so |a| is undefined."""


class OutOfBallError(CliffspecError, ValueError):
    pass


class NotInGroupError(CliffspecError, ValueError):
    pass


class DegeneracyError(CliffspecError, ArithmeticError):
    """A numerical computation left the admissible region."""


class QuadratureError(CliffspecError, ArithmeticError):
    """Two quadrature refinement levels disagree."""


class AmbiguityError(CliffspecError, ArithmeticError):
    """Eigenvalue clustering or rank decisions are not well separated."""


class MapDegeneracyError(CliffspecError, ArithmeticError):
    """A map sends the spectrum onto a zero of infinite order or off its domain."""


class InputError(CliffspecError, ValueError):
    pass
