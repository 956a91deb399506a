"""Exact integrals of exponentiated tent functions.

On a simplex ``sigma`` with vertex heights ``y_0 .. y_d`` the integral of the
exponential of the affine interpolant is ``vol(sigma) * exp[y_0, ..., y_d]``,
the divided difference of ``exp`` scaled by the normalized volume.  Summing
over a triangulation that refines the induced subdivision integrates
``exp(h_{X,y})`` over the hull.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConeViolation
from .geometry import (
    PointConfiguration,
    Subdivision,
    _as_heights,
    _zero_based_simplex,
    induced_cells,
    make_relevant,
    normalized_volume,
    refining_simplices,
    secondary_cone_contains,
)
from .hfunc import TAU_H


@dataclass(frozen=True)
class MassResult:
    """Total integral of ``exp(h_{X,y})`` with its per-cell breakdown.

    Attributes
    ----------
    total_mass : float
    per_cell : tuple of (cell, mass)
        Cells are 1-based index tuples.
    """

    total_mass: float
    per_cell: tuple[tuple[tuple[int, ...], float], ...]

    def to_json(self) -> dict:
        return {
            "total_mass": self.total_mass,
            "per_cell": [{"cell": list(c), "mass": m} for c, m in self.per_cell],
        }


def divided_difference_direct(values) -> float:
    """``sum_i e^{y_i} / prod_{j != i} (y_i - y_j)``; accurate only for well separated values."""
    y = np.asarray(values, dtype=float).reshape(-1)
    total = 0.0
    for i in range(y.size):
        total += math.exp(y[i]) / float(np.prod(y[i] - np.delete(y, i)))
    return total


def stable_exp_divided_difference(values) -> float:
    """The divided difference ``exp[y_0, ..., y_d]``, accurate for any spacing.

    Repeated values are allowed (confluent limit ``e^y / d!`` when all agree).
    """
    return float(kernels.dd_exp(np.asarray(values, dtype=float)))


def _well_separated(y: np.ndarray) -> bool:
    return y.size < 2 or float(np.min(np.diff(np.sort(y)))) > TAU_H


def exp_integral_simplex(config: PointConfiguration, simplex, heights_at_vertices) -> float:
    """Integral over a simplex of ``exp`` of the affine function with the given vertex values.

    Parameters
    ----------
    simplex : iterable of int
        1-based vertex indices.
    heights_at_vertices : sequence of float
        Values at the vertices in the order of ``sorted(simplex)``.
    """
    vol = normalized_volume(config, simplex)
    y = np.asarray(heights_at_vertices, dtype=float).reshape(-1)
    if y.size != config.d + 1:
        raise ValueError(f"need {config.d + 1} vertex heights")
    if _well_separated(y) and np.max(np.abs(y)) < 700:
        return vol * divided_difference_direct(y)
    return vol * stable_exp_divided_difference(y)


def _simplex_masses(config: PointConfiguration, simplex_ids: np.ndarray, y: np.ndarray) -> np.ndarray:
    tab = config.tables
    return tab.volumes[simplex_ids] * kernels.simplex_values(y[tab.simplices[simplex_ids]])


def exp_integral_subdivision(config: PointConfiguration, triangulation: Subdivision, heights) -> MassResult:
    """Integral of ``exp(h_{X,y})`` summed simplex by simplex over ``triangulation``.

    Raises
    ------
    ConeViolation
        If the tent is not affine on every simplex of ``triangulation``.
    """
    y = _as_heights(config, heights)
    if not secondary_cone_contains(config, triangulation, y):
        raise ConeViolation("heights are not in the secondary cone of the triangulation")
    per = []
    for cell in triangulation.cells:
        idx = _zero_based_simplex(config, cell)
        per.append((cell, exp_integral_simplex(config, cell, y[list(idx)])))
    return MassResult(float(math.fsum(m for _, m in per)), tuple(per))


def total_mass(config: PointConfiguration, heights) -> MassResult:
    """``integral over conv(X) of exp(h_{X,y})``, reported per induced cell.

    Each induced cell is triangulated (any refinement gives the same value)
    and integrated exactly.
    """
    y = _as_heights(config, heights)
    cells = induced_cells(config, y, check=False)
    ids = refining_simplices(config, cells)
    masses = _simplex_masses(config, ids, y)
    simp = config.tables.simplices[ids]
    per = []
    for cell in cells:
        inside = np.all(np.isin(simp, cell), axis=1)
        per.append((tuple(i + 1 for i in cell), float(math.fsum(masses[inside]))))
    return MassResult(float(math.fsum(masses)), tuple(per))


def uniform_height(config: PointConfiguration) -> float:
    """The constant height ``c`` with ``e^c * vol(P) / d! = 1`` (uniform density)."""
    return -math.log(config.volume / math.factorial(config.d))


def normalize_heights(config: PointConfiguration, heights) -> np.ndarray:
    """Relevant heights with total mass 1 and the same induced subdivision."""
    y = make_relevant(config, _as_heights(config, heights))
    return y - math.log(total_mass(config, y).total_mass)
