"""Chebyshev centers: analytic cases, a grid-search oracle, flat restriction."""

import math

import numpy as np
import pytest

from polyhop import (
    Infeasible,
    Region,
    SignedConstraint,
    Unbounded,
    chebyshev_center,
    hyperplane_through,
    region_is_bounded,
)
from polyhop.hyperplanes import GE, LE, Hyperplane
from polyhop.lp import ball_feasible_exact


def halfspace(normal, offset, sense):
    return SignedConstraint(Hyperplane.from_exact(normal, offset), sense)


def square_region():
    return Region(
        [
            halfspace([1, 0], 1, LE),
            halfspace([1, 0], -1, GE),
            halfspace([0, 1], 1, LE),
            halfspace([0, 1], -1, GE),
        ]
    )


def test_unit_square():
    ball = chebyshev_center(square_region())
    assert np.allclose(ball.center, [0, 0], atol=1e-9)
    assert ball.radius == pytest.approx(1.0, abs=1e-9)


def test_right_triangle_incircle():
    region = Region(
        [
            halfspace([1, 0], 0, GE),
            halfspace([0, 1], 0, GE),
            halfspace([1, 1], 1, LE),
        ]
    )
    ball = chebyshev_center(region)
    expected = (2 - math.sqrt(2)) / 2  # analytic inradius of the right isoceles triangle
    assert ball.radius == pytest.approx(expected, abs=1e-9)
    assert np.allclose(ball.center, [ball.radius, ball.radius], atol=1e-8)
    # grid-search oracle: best min-distance-to-boundary over a fine grid
    best = 0.0
    for x in np.linspace(0, 1, 201):
        for y in np.linspace(0, 1, 201):
            if x + y > 1:
                continue
            dist = min(x, y, (1 - x - y) / math.sqrt(2))
            best = max(best, dist)
    assert ball.radius == pytest.approx(best, abs=1e-2)


def test_halfplane_unbounded():
    region = Region([halfspace([1, 0], 0, GE)])
    with pytest.raises(Unbounded):
        chebyshev_center(region)


def test_empty_region_infeasible():
    region = Region(
        [
            halfspace([1, 0], 0, LE),
            halfspace([1, 0], 1, GE),
        ]
    )
    with pytest.raises(Infeasible):
        chebyshev_center(region)


def test_boundedness_check():
    assert region_is_bounded(square_region())
    slab = Region([halfspace([1, 0], 1, LE), halfspace([1, 0], -1, GE)])
    assert not region_is_bounded(slab)
    halfplane = Region([halfspace([1, 1], 1, LE)])
    assert not region_is_bounded(halfplane)


def test_equality_flat_restriction():
    # cube cross-section by the plane z = 0: expect the 2D incircle of the square
    region = Region(
        [
            halfspace([1, 0, 0], 1, LE),
            halfspace([1, 0, 0], -1, GE),
            halfspace([0, 1, 0], 1, LE),
            halfspace([0, 1, 0], -1, GE),
            halfspace([0, 0, 1], 2, LE),
            halfspace([0, 0, 1], -2, GE),
        ],
        equality=Hyperplane.from_exact([0, 0, 1], 0),
    )
    ball = chebyshev_center(region)
    assert ball.radius == pytest.approx(1.0, abs=1e-9)
    assert abs(ball.center[2]) < 1e-12
    # radius is measured within the flat, so the z-slabs at distance 2 do not cap it


def test_equality_flat_radius_within_flat():
    # slab -1 <= x <= 1 with equality y = 0 in 2D: the region within the flat is
    # the segment [-1, 1], radius 1 (the plane's own distance does not count)
    region = Region(
        [halfspace([1, 0], 1, LE), halfspace([1, 0], -1, GE)],
        equality=Hyperplane.from_exact([0, 1], 0),
    )
    ball = chebyshev_center(region)
    assert ball.radius == pytest.approx(1.0, abs=1e-9)


def test_exact_ball_feasibility():
    region = square_region()
    ball = chebyshev_center(region)
    assert ball_feasible_exact(region, ball.exact_center(), ball.radius, shrink=1)
    assert not ball_feasible_exact(region, ball.exact_center(), ball.radius * 1.01)


def test_tilted_triangle_from_planes():
    # region built from hyperplane_through, checking slack normalization
    p1 = hyperplane_through([(0, 0), (4, 1)])
    p2 = hyperplane_through([(4, 1), (1, 5)])
    p3 = hyperplane_through([(1, 5), (0, 0)])
    # orient all constraints to contain the centroid
    centroid = (5 / 3, 2.0)
    cons = []
    for p in (p1, p2, p3):
        val = float(np.dot(p.float_normal(), centroid)) - p.float_offset()
        cons.append(SignedConstraint(p, LE if val <= 0 else GE))
    ball = chebyshev_center(Region(cons))
    for c in cons:
        a, b = c.as_le()
        slack = b - float(np.dot(a, ball.center))
        assert slack >= ball.radius * np.linalg.norm(a) - 1e-9
