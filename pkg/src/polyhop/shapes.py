"""Constructors for standard polytopes used in demos and verification."""

import itertools
from fractions import Fraction

from .polytope import Polytope


def cube(d, half_width=1) -> Polytope:
    """The d-cube [-h, h]^d (2^d vertices)."""
    rows = [[half_width * s for s in signs] for signs in itertools.product((-1, 1), repeat=d)]
    return Polytope(rows)


def cross_polytope(d) -> Polytope:
    """Unit cross-polytope: vertices +-e_i."""
    rows = []
    for i in range(d):
        for s in (1, -1):
            row = [0] * d
            row[i] = s
            rows.append(row)
    return Polytope(rows)


def simplex(d) -> Polytope:
    """Standard d-simplex: origin plus the unit basis vectors."""
    rows = [[0] * d]
    for i in range(d):
        row = [0] * d
        row[i] = 1
        rows.append(row)
    return Polytope(rows)


def cyclic_polytope(n, d, start=1) -> Polytope:
    """Cyclic polytope C(n, d): n points on the moment curve t -> (t, t^2, ..., t^d)."""
    rows = []
    for k in range(n):
        t = Fraction(start + k)
        rows.append([t**j for j in range(1, d + 1)])
    return Polytope(rows)


def triangular_prism() -> Polytope:
    """Prism over a triangle, decks at the last coordinate +-1."""
    tri = [(0, 0), (2, 0), (0, 2)]
    rows = [[x, y, 1] for x, y in tri] + [[x, y, -1] for x, y in tri]
    return Polytope(rows)


def prism_over(base_rows, height=1) -> Polytope:
    """Prism over an arbitrary (d-1)-dimensional base, decks at +-height."""
    rows = [list(r) + [height] for r in base_rows] + [list(r) + [-height] for r in base_rows]
    return Polytope(rows)


def gale_evenness_facets(n, d):
    """Facet vertex sets of C(n, d) by Gale's evenness condition.

    A d-subset S of {0..n-1} is a facet iff any two elements outside S have an
    even number of S-elements strictly between them.
    """
    facets = []
    for S in itertools.combinations(range(n), d):
        sset = set(S)
        outside = [i for i in range(n) if i not in sset]
        ok = True
        for a, b in itertools.combinations(outside, 2):
            between = sum(1 for s in S if a < s < b)
            if between % 2 == 1:
                ok = False
                break
        if ok:
            facets.append(frozenset(S))
    return facets
