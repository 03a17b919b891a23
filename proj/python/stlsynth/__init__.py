"""Reach-tube control synthesis from signal temporal logic specifications."""

from ._core import (
    Box,
    ConstrainedZonotope,
    Scenario,
    StlsynthError,
    Zonotope,
    contains_point,
    dare,
    discretize,
    expand,
    interval_hull,
    intersect,
    is_empty,
    load_scenario,
    monitor,
    partition,
    render_svg,
    run,
    scenario_from_dict,
    vertices_2d,
    volume,
)

__all__ = [
    "Box",
    "ConstrainedZonotope",
    "Scenario",
    "StlsynthError",
    "Zonotope",
    "contains_point",
    "dare",
    "discretize",
    "expand",
    "interval_hull",
    "intersect",
    "is_empty",
    "load_scenario",
    "monitor",
    "partition",
    "render_svg",
    "run",
    "scenario_from_dict",
    "vertices_2d",
    "volume",
]
