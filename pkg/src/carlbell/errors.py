"""Exception hierarchy shared by every evaluator."""


class CarlbellError(Exception):
    """Base class for all library errors."""


class DomainError(CarlbellError, ValueError):
    """A point or parameter lies outside the admissible domain."""


class DegeneratePoint(DomainError):
    """The ratio x1^p / x2 is undefined because x2 = 0."""


class PoleError(CarlbellError, ZeroDivisionError):
    """A rational expression was evaluated at one of its poles."""


class NoNegativeRoot(CarlbellError):
    """The minimizing (negative) branch does not exist at this point."""


class Nonconvergence(CarlbellError, RuntimeError):
    """Root bracketing failed; indicates a bug rather than bad input."""


class BoundaryGradient(CarlbellError):
    """Gradient requested where it is a pole or only one-sided."""


class NotSuperharmonic(CarlbellError):
    """A tree function has a negative discrete Laplacian somewhere."""


class DepthTooSmall(CarlbellError, ValueError):
    """Truncation depth cannot hold even one generation of the construction."""


class NoRealRoot(CarlbellError):
    """A quadratic that must have real roots produced a negative discriminant."""
