"""Weighted log-concave maximum-likelihood estimation via regular subdivisions.

Indices in all public data structures and file formats are 1-based.
"""

from .duality import cone_membership, normal_cone_generators, realize_subdivision, weights_from_heights
from .geometry import (
    PointConfiguration,
    Subdivision,
    Triangulation,
    enumerate_regular_triangulations,
    gkz_vector,
    induced_subdivision,
)
from .hfunc import h_eval
from .quadrature import normalize_heights, total_mass
from .solver import MleResult, SolverOptions, WeightVector, solve_mle

__version__ = "0.1.0"

__all__ = [
    "MleResult",
    "PointConfiguration",
    "SolverOptions",
    "Subdivision",
    "Triangulation",
    "WeightVector",
    "__version__",
    "cone_membership",
    "enumerate_regular_triangulations",
    "gkz_vector",
    "h_eval",
    "induced_subdivision",
    "normal_cone_generators",
    "normalize_heights",
    "realize_subdivision",
    "solve_mle",
    "total_mass",
    "weights_from_heights",
]
