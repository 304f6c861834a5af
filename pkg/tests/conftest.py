"""Shared generators and oracles for the test suite."""

import itertools
from fractions import Fraction

import numpy as np
import pytest

from polyhop import Polytope, proper_spanning_check


def random_integer_polytope(rng, n, d, spread=9):
    """A valid random polytope with integer coordinates: sampled points reduced
    to their hull vertices, resampled until n vertices in convex position."""
    for _ in range(200):
        pts = rng.integers(-spread, spread + 1, size=(n + 4, d))
        pts = np.unique(pts, axis=0)
        if len(pts) < d + 2:
            continue
        try:
            from scipy.spatial import ConvexHull

            hull = ConvexHull(pts.astype(float))
        except Exception:
            continue
        verts = pts[sorted(hull.vertices)]
        if len(verts) < max(d + 2, 4):
            continue
        if len(verts) > n:
            verts = verts[:: max(1, len(verts) // n)][:n]
            if len(verts) < d + 2:
                continue
        try:
            P = Polytope(verts.tolist())
        except Exception:
            continue
        if proper_spanning_check(P).ok:
            return P
    raise RuntimeError("failed to generate a random polytope")


def random_sphere_polytope(rng, n, d, digits=6):
    """n points near the unit sphere, rounded to rationals (always convex position)."""
    for _ in range(50):
        x = rng.normal(size=(n, d))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        rows = [[Fraction(round(v * 10**digits), 10**digits) for v in row] for row in x]
        try:
            P = Polytope(rows)
        except Exception:
            continue
        if proper_spanning_check(P).ok:
            return P
    raise RuntimeError("failed to generate a sphere polytope")


# ---------------------------------------------------------------------------
# independent oracles (kept free of the library's enumeration internals)


def oracle_facets(P):
    """Brute force over every d-subset, testing the supporting-hyperplane
    condition in Fraction arithmetic. Returns the set of facet vertex sets."""
    n, d = P.n, P.d
    rows = [list(map(Fraction, r)) for r in P.vertices]
    facets = set()
    for idxs in itertools.combinations(range(n), d):
        plane = _plane_through_fractions([rows[i] for i in idxs])
        if plane is None:
            continue
        a, b = plane
        pos = neg = False
        onset = []
        for i, r in enumerate(rows):
            val = sum(ai * xi for ai, xi in zip(a, r)) - b
            if val > 0:
                pos = True
            elif val < 0:
                neg = True
            else:
                onset.append(i)
        if pos and neg:
            continue
        facets.add(frozenset(onset))
    return facets


def _plane_through_fractions(points):
    """Hyperplane through d points by Fraction Gaussian elimination on the
    homogeneous system [p | -1] . (a, b) = 0; None if degenerate."""
    d = len(points[0])
    m = [[Fraction(x) for x in p] + [Fraction(-1)] for p in points]
    cols = d + 1
    pivots = []
    r = 0
    for c in range(cols):
        pivot = None
        for i in range(r, len(m)):
            if m[i][c] != 0:
                pivot = i
                break
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [m[i][j] - f * m[r][j] for j in range(cols)]
        pivots.append(c)
        r += 1
    if r != d:
        return None  # null space dimension != 1
    free = [c for c in range(cols) if c not in pivots][0]
    sol = [Fraction(0)] * cols
    sol[free] = Fraction(1)
    for i, c in enumerate(pivots):
        sol[c] = -m[i][free]
    a, b = sol[:d], sol[d]
    if all(x == 0 for x in a):
        return None
    return a, b


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
