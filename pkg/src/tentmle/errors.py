"""Exception hierarchy.

Every error raised on purpose by the package derives from ``TentError`` so
callers (and the CLI's exit-code mapping) can catch them in one place.
"""


class TentError(Exception):
    """Base class for all package errors."""


class InvalidInput(TentError, ValueError):
    """Malformed or inconsistent input."""


class DegenerateConfiguration(InvalidInput):
    """Duplicate points, too few points, or a lower-dimensional hull."""


class DegenerateSample(DegenerateConfiguration):
    """A random draw produced a degenerate configuration."""


class InvalidWeights(InvalidInput):
    """Weights that are not positive or do not sum to one."""


class HullDegenerate(TentError, ArithmeticError):
    """The lifted upper hull could not be resolved within tolerance."""


class TooLarge(TentError):
    """A combinatorial enumeration would exceed its size guard."""


class NotRegular(TentError):
    """A subdivision is not induced by any height vector."""


class ConeViolation(TentError):
    """Heights do not lie in the closed secondary cone of a triangulation."""


class NotRelevant(TentError):
    """Some tent pole lies strictly below the tent."""


class NotUnitMass(TentError):
    """Heights whose exponentiated tent does not integrate to one."""


class NearSingular(TentError, ArithmeticError):
    """Closed form requested where cancellation would destroy accuracy."""


class NotConverged(TentError):
    """The optimizer stopped before meeting its certificate."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class RealizationFailed(TentError):
    """No tried weight vector reproduced the requested subdivision."""
