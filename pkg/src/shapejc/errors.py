"""Exception hierarchy shared by all shapejc modules."""


class ShapeJCError(Exception):
    """Base class for every error raised by this package."""


class ModelValidityError(ShapeJCError, ValueError):
    """A shape-invariant model produced a non-positive remainder or bad parameter."""


class OutOfRangeError(ShapeJCError, IndexError):
    """An index (rung, ladder level, remainder count) is outside the retained range."""


class DomainError(ShapeJCError, ValueError):
    """A scalar function was evaluated outside its domain."""


class DegenerateCouplingError(ShapeJCError, ValueError):
    """The coupling constant vanishes, so beta = hbar*delta/alpha is undefined."""


class SeriesRangeError(ShapeJCError, ValueError):
    """Arguments exceed the convergence guard of the truncated double series."""


class QuadratureError(ShapeJCError, RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


class PreconditionError(ShapeJCError, ValueError):
    """An operation was called outside its documented regime."""
