"""Shared helpers for the test suite."""

import numpy as np
import pytest

from floodmob.geo import PolygonGeom


def star_polygon(rng, cx, cy, r_max, n_vertices=10):
    """Random simple polygon, star-shaped around (cx, cy)."""
    angles = np.sort(rng.uniform(0.0, 2.0 * np.pi, n_vertices))
    radii = rng.uniform(0.3 * r_max, r_max, n_vertices)
    xs = cx + radii * np.cos(angles)
    ys = cy + radii * np.sin(angles)
    return list(zip(xs, ys))


def convex_polygon(rng, cx, cy, radius, n_vertices=8):
    """Random convex polygon: vertices on a circle at sorted angles."""
    angles = np.sort(rng.uniform(0.0, 2.0 * np.pi, n_vertices))
    xs = cx + radius * np.cos(angles)
    ys = cy + radius * np.sin(angles)
    return list(zip(xs, ys))


def unit_square(x0=0.0, y0=0.0, side=1.0):
    return PolygonGeom(
        [(x0, y0), (x0 + side, y0), (x0 + side, y0 + side), (x0, y0 + side)]
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240401)
