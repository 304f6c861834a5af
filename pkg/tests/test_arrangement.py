"""Arrangement enumeration: counts, canonical dedup, incremental soundness."""

import math
from fractions import Fraction

import numpy as np
import pytest

import polyhop as ph
from polyhop import shapes
from polyhop.arrangement import enumerate_arrangement
from polyhop.orchestrator import _seed_sphere


def test_triangle_three_lines():
    P = ph.Polytope([(0, 0), (4, 0), (0, 4)])
    cache = enumerate_arrangement(P)
    assert len(cache) == 3
    assert cache.subset_count() == 3


def test_four_generic_points_six_lines():
    P = ph.Polytope([(0, 0), (4, 0), (0, 4), (5, 5)])
    cache = enumerate_arrangement(P)
    assert len(cache) == math.comb(4, 2)


def test_reference_subset_count():
    P = ph.reference_prismatoid()
    cache = enumerate_arrangement(P)
    assert cache.subset_count() == math.comb(24, 5)
    # all same-deck 5-subsets collapse onto the two deck planes
    deck_subsets = 2 * math.comb(12, 5)
    assert len(cache) == math.comb(24, 5) - deck_subsets + 2


def test_planes_contain_their_generators():
    P = shapes.cross_polytope(3)
    cache = enumerate_arrangement(P)
    for plane, subsets in cache.planes.items():
        for subset in subsets:
            for i in subset:
                assert plane.evaluate(P.vertices[i]) == 0


def test_incremental_equals_scratch_on_hop_sequences(rng):
    # replace random vertices with random rational points; the incrementally
    # maintained cache must equal a fresh enumeration every time
    for seq in range(10):
        P = _seed_sphere(7, 3, np.random.default_rng(1000 + seq))
        cache = enumerate_arrangement(P)
        for step in range(4):
            i = int(rng.integers(0, P.n))
            point = [Fraction(int(x), 1000) for x in rng.integers(-2000, 2000, size=3)]
            P = P.replace_vertex(i, point)
            cache = enumerate_arrangement(P, cache, i)
            scratch = enumerate_arrangement(P)
            assert set(cache.planes) == set(scratch.planes)
            assert all(cache.planes[k] == scratch.planes[k] for k in cache.planes)


def test_sorted_planes_deterministic():
    P = shapes.cube(2)
    c1 = enumerate_arrangement(P).sorted_planes()
    c2 = enumerate_arrangement(P).sorted_planes()
    assert c1 == c2
