"""Bundled example inputs (``hexagon``, ``six_points``, ``five_points``, ``octahedron``, ``square``)."""

from __future__ import annotations

import json
from importlib import resources

from .geometry import PointConfiguration

NAMES = ("hexagon", "six_points", "five_points", "octahedron", "square")


def fixture_path(name: str):
    """Path-like handle of a bundled JSON file."""
    if name not in NAMES:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(NAMES)}")
    return resources.files("tentmle") / "data" / f"{name}.json"


def load_fixture(name: str) -> dict:
    return json.loads(fixture_path(name).read_text())


def fixture_config(name: str) -> PointConfiguration:
    return PointConfiguration.from_json(load_fixture(name))
