"""Exception hierarchy for the residua package.

Every failure mode raised by the core modules derives from ResiduaError so
callers (service endpoints, CLI) can convert math-level failures into
structured failure reports instead of tracebacks.
"""

from __future__ import annotations


class ResiduaError(Exception):
    """Base class for all package-specific errors."""


class VariableMismatch(ResiduaError):
    """Operands live over different variable counts or coordinate counts."""


class NotDivisible(ResiduaError):
    """Exact polynomial division left a nonzero remainder."""


class NotHolomorphic(ResiduaError):
    """An iterated limit hit a surviving pure-variable denominator factor."""


class PoleAtZero(ResiduaError):
    """A one-parameter substitution has a genuine pole at the origin."""


class WitnessFails(ResiduaError):
    """A positivity witness could not be produced (pole at the origin,
    zero numerator, or a denominator factor with a negative coefficient)."""


class SingularMinor(ResiduaError):
    """The leading minor required by a coefficient ratio vanishes."""


class IndexOutOfRange(ResiduaError):
    """A row or column multi-index exceeds the matrix shape."""


class DegreeMismatch(ResiduaError):
    """No expansion term can absorb the test form's differentials."""


class InsufficientSmoothness(ResiduaError):
    """The radial profile is too rough for the pole order being paired."""


class UnsupportedRank(ResiduaError):
    """A request exceeds the supported desk-scale shape bounds."""


class NotCompleteIntersection(ResiduaError):
    """Monomial factors do not have pairwise disjoint variable supports."""


class DegenerateTorus(ResiduaError):
    """The exponent matrix of a torus request is not invertible."""


class QuadratureNotConverged(ResiduaError):
    """Numerical refinement hit its cap before reaching the tolerance."""


class ParseError(ResiduaError):
    """Input text did not match the monomial/test-form grammar."""

    def __init__(self, message: str, text: str = "", position: int | None = None):
        self.text = text
        self.position = position
        if position is not None:
            message = f"{message} (at position {position} in {text!r})"
        super().__init__(message)
