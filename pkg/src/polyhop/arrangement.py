"""The hyperplane arrangement spanned by a polytope's own vertices.

Every d-subset of vertices that is affinely independent generates one plane;
planes are deduplicated by their canonical integer form. The cache maps each
plane to its generator subsets so that replacing a single vertex only
recomputes the subsets that mention it.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import AffinelyDependent
from .hyperplanes import Hyperplane, hyperplane_through
from .polytope import Polytope


class ArrangementCache:
    """Canonical plane set plus the generator map plane -> set of d-subsets."""

    def __init__(self, n, d):
        self.n = n
        self.d = d
        self.planes = {}  # Hyperplane -> set of frozenset vertex indices
        self._sorted = None
        self._float = None

    def add_subset(self, subset, plane):
        self.planes.setdefault(plane, set()).add(subset)
        self._invalidate()

    def remove_vertex_subsets(self, vertex):
        """Drop every generator subset containing the vertex; drop orphaned planes."""
        dead = []
        for plane, subsets in self.planes.items():
            doomed = {s for s in subsets if vertex in s}
            if doomed:
                subsets -= doomed
                if not subsets:
                    dead.append(plane)
        for plane in dead:
            del self.planes[plane]
        self._invalidate()

    def _invalidate(self):
        self._sorted = None
        self._float = None

    def sorted_planes(self):
        """Planes in canonical order (deterministic across runs)."""
        if self._sorted is None:
            self._sorted = sorted(self.planes, key=lambda h: (h.normal, h.offset))
        return self._sorted

    def float_equations(self):
        """(A, b, norms) arrays aligned with sorted_planes(), rows normalized."""
        if self._float is None:
            planes = self.sorted_planes()
            A = np.array([p.float_normal() for p in planes], dtype=float)
            b = np.array([p.float_offset() for p in planes], dtype=float)
            norms = np.linalg.norm(A, axis=1)
            self._float = (A, b, norms)
        return self._float

    def subset_count(self):
        return sum(len(s) for s in self.planes.values())

    def __len__(self):
        return len(self.planes)


def enumerate_arrangement(P: Polytope, cache: ArrangementCache | None = None,
                          changed_vertex: int | None = None) -> ArrangementCache:
    """Build or incrementally update the arrangement cache for P.

    With a cache and a changed vertex index, only subsets mentioning that
    vertex are recomputed; the result equals a from-scratch enumeration.
    Degenerate (affinely dependent) subsets are skipped.
    """
    V = P.int_vertices()
    scale = P.int_scale()
    if cache is not None and changed_vertex is not None and cache.n == P.n and cache.d == P.d:
        cache.remove_vertex_subsets(changed_vertex)
        others = [i for i in range(P.n) if i != changed_vertex]
        for rest in itertools.combinations(others, P.d - 1):
            idxs = tuple(sorted(rest + (changed_vertex,)))
            plane = _plane_of(V, scale, idxs)
            if plane is not None:
                cache.add_subset(frozenset(idxs), plane)
        return cache

    cache = ArrangementCache(P.n, P.d)
    for idxs in itertools.combinations(range(P.n), P.d):
        plane = _plane_of(V, scale, idxs)
        if plane is not None:
            cache.add_subset(frozenset(idxs), plane)
    return cache


def _plane_of(V, scale, idxs) -> Hyperplane | None:
    from .hull import _canonical_plane, _original_plane
    from .linalg import normal_through

    res = normal_through([V[i] for i in idxs])
    if res is None:
        return None
    a, b = _canonical_plane(res)
    return _original_plane(a, b, scale)
