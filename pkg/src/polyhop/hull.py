"""Facet enumeration, face tests, polytope graphs and polar duality.

Two modes are provided everywhere:

* ``float``: one qhull run; coplanar output simplices are grouped by qhull's
  own merged facet equations. No exact arithmetic. Used for search-time
  pre-screening only.
* ``exact``: qhull is used only as a hint generator. Every candidate facet is
  re-derived and verified in exact integer arithmetic, and the triangulation
  is certified to be a closed pseudomanifold covering the whole boundary
  (every ridge simplex shared by exactly two facet simplices, connected,
  every vertex covered). Any failure falls back to exhaustive exact
  enumeration over all d-subsets, which is correct unconditionally.

Final property evaluation always goes through the exact mode.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import DegenerateInput
from .hyperplanes import GE, LE, Hyperplane, hyperplane_through
from .linalg import affine_rank, normal_through, reduce_int_vector
from .polytope import Polytope


@dataclass
class Facet:
    """A maximal face: its vertex set plus the supporting hyperplane.

    ``inside`` is the sense such that every vertex satisfies
    ``normal . x  inside  offset``. Exact mode carries a canonical
    Hyperplane; float mode carries qhull's equation instead.
    """

    vertices: frozenset
    mask: int
    plane: Optional[Hyperplane] = None
    inside: str = LE
    float_normal: Optional[np.ndarray] = None
    float_offset: float = 0.0


class FacetComplex:
    """Facets of a polytope together with their ridge adjacency."""

    def __init__(self, facets, adjacency, exact, n, d):
        self.facets = facets
        self.adjacency = adjacency  # list[set[int]] aligned with facets
        self.exact = exact
        self.n = n
        self.d = d

    def __len__(self):
        return len(self.facets)

    def facet_masks(self):
        return [f.mask for f in self.facets]

    def adjacency_dict(self):
        return {i: self.adjacency[i] for i in range(len(self.facets))}

    def vertex_membership(self):
        """For each vertex index, the set of facet indices containing it."""
        member = [set() for _ in range(self.n)]
        for fi, f in enumerate(self.facets):
            for v in f.vertices:
                member[v].add(fi)
        return member

    def smallest_face_mask(self, mask):
        """Bitmask of the smallest face containing the given vertex bitmask."""
        out = None
        for f in self.facets:
            if f.mask & mask == mask:
                out = f.mask if out is None else out & f.mask
        if out is None:
            return (1 << self.n) - 1
        return out


# ---------------------------------------------------------------------------
# enumeration


def facet_enumeration(P: Polytope, mode: str = "exact") -> FacetComplex:
    """Enumerate the facets of P. Results are cached on the polytope per mode."""
    if mode in P._facets:
        return P._facets[mode]
    if mode == "float":
        complex_ = _facets_float(P)
    elif mode == "exact":
        complex_ = _facets_exact(P)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    P._facets[mode] = complex_
    return complex_


def _qhull(P: Polytope):
    pts = P.float_vertices()
    opts = "Qt Qx" if P.d > 4 else "Qt"
    return ConvexHull(pts, qhull_options=opts)


def _facets_float(P: Polytope) -> FacetComplex:
    if P.d == 1:
        return _facets_dim1(P, exact=False)
    hull = _qhull(P)
    groups = {}  # equation bytes -> [group index]
    simplex_group = []
    for i in range(len(hull.simplices)):
        key = hull.equations[i].tobytes()
        if key not in groups:
            groups[key] = len(groups)
        simplex_group.append(groups[key])

    nfac = len(groups)
    members = [set() for _ in range(nfac)]
    equations = [None] * nfac
    for i, simp in enumerate(hull.simplices):
        g = simplex_group[i]
        members[g].update(int(v) for v in simp)
        equations[g] = hull.equations[i]

    facets = []
    for g in range(nfac):
        verts = frozenset(members[g])
        eq = equations[g]
        facets.append(
            Facet(
                vertices=verts,
                mask=_mask(verts),
                float_normal=eq[:-1].copy(),
                float_offset=-float(eq[-1]),
            )
        )
    adjacency = _adjacency_from_simplices(hull.simplices, simplex_group, nfac, P.d)
    return FacetComplex(facets, adjacency, exact=False, n=P.n, d=P.d)


def _facets_exact(P: Polytope) -> FacetComplex:
    if P.d == 1:
        return _facets_dim1(P, exact=True)
    try:
        return _facets_verified_qhull(P)
    except _VerificationFailed:
        return _facets_brute_force(P)


class _VerificationFailed(Exception):
    pass


def _facets_verified_qhull(P: Polytope) -> FacetComplex:
    try:
        hull = _qhull(P)
    except QhullError as exc:
        raise _VerificationFailed(str(exc))

    V = P.int_vertices()
    scale = P.int_scale()
    n, d = P.n, P.d
    simplices = [tuple(sorted(int(v) for v in simp)) for simp in hull.simplices]

    # combinatorial certificate: closed, connected pseudomanifold covering all vertices
    ridge_owner = {}
    for si, simp in enumerate(simplices):
        for sub in itertools.combinations(simp, d - 1):
            ridge_owner.setdefault(sub, []).append(si)
    if any(len(owners) != 2 for owners in ridge_owner.values()):
        raise _VerificationFailed("triangulation is not a closed pseudomanifold")
    covered = set()
    for simp in simplices:
        covered.update(simp)
    if covered != set(range(n)):
        # a vertex qhull dropped: either invalid input or float failure
        missing = sorted(set(range(n)) - covered)
        from .lp import exact_point_in_hull

        for i in missing:
            others = [V[j] for j in range(n) if j != i]
            if exact_point_in_hull(V[i], others):
                raise DegenerateInput(f"row {i} lies in the hull of the other rows")
        raise _VerificationFailed("qhull dropped a genuine vertex")
    if not _simplices_connected(simplices, ridge_owner):
        raise _VerificationFailed("triangulated boundary is not connected")

    # exact planes, deduplicated; exact global sidedness per plane
    plane_of = {}
    plane_ids = {}
    facets = []
    onsets = []
    insides = []
    for simp in simplices:
        key0 = simp
        pts = [V[i] for i in simp]
        res = normal_through(pts)
        if res is None:
            raise _VerificationFailed("degenerate qhull simplex")
        a, b = _canonical_plane(res)
        pid = plane_ids.get((a, b))
        if pid is None:
            onset, inside = _exact_supporting(V, a, b)
            if onset is None:
                raise _VerificationFailed("qhull simplex plane is not supporting")
            pid = len(facets)
            plane_ids[(a, b)] = pid
            facets.append(_original_plane(a, b, scale))
            onsets.append(onset)
            insides.append(inside)
        plane_of[key0] = pid

    # vertices on a facet plane must be corners reported by qhull
    union = [set() for _ in facets]
    for simp, pid in plane_of.items():
        union[pid].update(simp)
    for pid in range(len(facets)):
        if frozenset(union[pid]) != onsets[pid]:
            disputed = sorted(onsets[pid] - frozenset(union[pid]))
            from .lp import exact_point_in_hull

            for i in disputed:
                others = [V[j] for j in range(n) if j != i]
                if exact_point_in_hull(V[i], others):
                    raise DegenerateInput(f"row {i} lies in the hull of the other rows")
            raise _VerificationFailed("facet corner set disagreement")

    out = [
        Facet(vertices=onsets[i], mask=_mask(onsets[i]), plane=facets[i], inside=insides[i])
        for i in range(len(facets))
    ]
    simplex_group = [plane_of[s] for s in simplices]
    adjacency = _adjacency_from_simplices(simplices, simplex_group, len(out), d)
    return FacetComplex(out, adjacency, exact=True, n=n, d=d)


def _facets_brute_force(P: Polytope) -> FacetComplex:
    """Exhaustive exact enumeration: test every d-subset's supporting condition."""
    V = P.int_vertices()
    scale = P.int_scale()
    n, d = P.n, P.d
    seen = set()
    planes = []
    onsets = []
    insides = []
    for idxs in itertools.combinations(range(n), d):
        res = normal_through([V[i] for i in idxs])
        if res is None:
            continue
        a, b = _canonical_plane(res)
        if (a, b) in seen:
            continue
        seen.add((a, b))
        onset, inside = _exact_supporting(V, a, b)
        if onset is None:
            continue
        planes.append(_original_plane(a, b, scale))
        onsets.append(onset)
        insides.append(inside)
    covered = set()
    for s in onsets:
        covered.update(s)
    if covered != set(range(n)):
        missing = sorted(set(range(n)) - covered)
        raise DegenerateInput(f"rows {missing} lie on no facet (improper spanning)")
    facets = [
        Facet(vertices=onsets[i], mask=_mask(onsets[i]), plane=planes[i], inside=insides[i])
        for i in range(len(planes))
    ]
    adjacency = _adjacency_by_rank(facets, V, d)
    return FacetComplex(facets, adjacency, exact=True, n=n, d=d)


def _facets_dim1(P: Polytope, exact: bool) -> FacetComplex:
    vals = [(row[0], i) for i, row in enumerate(P.vertices)]
    lo = min(vals)[1]
    hi = max(vals)[1]
    facets = [
        Facet(frozenset([lo]), _mask({lo}), Hyperplane((1,), int(0)), GE),
        Facet(frozenset([hi]), _mask({hi}), Hyperplane((1,), int(0)), LE),
    ]
    if exact:
        facets[0] = Facet(
            frozenset([lo]), _mask({lo}), Hyperplane.from_exact([1], P.vertices[lo][0]), GE
        )
        facets[1] = Facet(
            frozenset([hi]), _mask({hi}), Hyperplane.from_exact([1], P.vertices[hi][0]), LE
        )
    adjacency = [set([1]), set([0])]
    return FacetComplex(facets, adjacency, exact=exact, n=P.n, d=1)


# -- helpers ------------------------------------------------------------------


def _mask(indices):
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def _canonical_plane(res):
    a, b = res
    values = reduce_int_vector(list(a) + [b])
    a, b = values[:-1], values[-1]
    for x in a:
        if x != 0:
            if x < 0:
                a = [-v for v in a]
                b = -b
            break
    return tuple(a), b


def _original_plane(a, b, scale):
    """Convert a canonical plane for scale-multiplied vertices to the original
    coordinates: a . (s v) = b is equivalent to (s a) . v = b."""
    values = reduce_int_vector([x * scale for x in a] + [b])
    return Hyperplane(tuple(values[:-1]), values[-1])


def _exact_supporting(V, a, b):
    """Onset and inside-sense if plane (a, b) supports conv(V); (None, None) otherwise."""
    onset = []
    pos = neg = False
    for i, row in enumerate(V):
        val = sum(aj * xj for aj, xj in zip(a, row)) - b
        if val > 0:
            pos = True
        elif val < 0:
            neg = True
        else:
            onset.append(i)
        if pos and neg:
            return None, None
    if not onset:
        return None, None
    return frozenset(onset), (LE if not pos else GE)


def _adjacency_from_simplices(simplices, simplex_group, nfac, d):
    """Facet adjacency from shared simplicial ridges across distinct facets."""
    adjacency = [set() for _ in range(nfac)]
    ridge_to = {}
    for si, simp in enumerate(simplices):
        key = tuple(sorted(int(v) for v in simp))
        for sub in itertools.combinations(key, d - 1):
            ridge_to.setdefault(sub, set()).add(simplex_group[si])
    for groups in ridge_to.values():
        if len(groups) == 2:
            g1, g2 = groups
            adjacency[g1].add(g2)
            adjacency[g2].add(g1)
    return adjacency


def _adjacency_by_rank(facets, V, d):
    """Facet adjacency by exact rank: a shared vertex set of affine rank d-1 is a ridge."""
    nfac = len(facets)
    adjacency = [set() for _ in range(nfac)]
    for i in range(nfac):
        for j in range(i + 1, nfac):
            shared = facets[i].vertices & facets[j].vertices
            if len(shared) < d - 1:
                continue
            if affine_rank([V[k] for k in shared]) == d - 1:
                adjacency[i].add(j)
                adjacency[j].add(i)
    return adjacency


def _simplices_connected(simplices, ridge_owner):
    if not simplices:
        return False
    neighbors = [set() for _ in simplices]
    for owners in ridge_owner.values():
        if len(owners) == 2:
            neighbors[owners[0]].add(owners[1])
            neighbors[owners[1]].add(owners[0])
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for v in neighbors[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == len(simplices)


# ---------------------------------------------------------------------------
# faces, graphs, duals


def face_test(P: Polytope, S) -> bool:
    """Exact test whether the vertex index set S spans a proper face of P.

    Uses the lattice fact that every face is the intersection of the facets
    containing it: S is a face iff it equals the vertex set of that
    intersection (and a supporting facet exists at all).
    """
    S = frozenset(S)
    if not S:
        raise ValueError("S must be nonempty")
    if len(S) == P.n:
        return False  # the whole polytope has no supporting hyperplane
    complex_ = facet_enumeration(P, "exact")
    mask = _mask(S)
    smallest = None
    for f in complex_.facets:
        if f.mask & mask == mask:
            smallest = f.mask if smallest is None else smallest & f.mask
    return smallest == mask


def facet_ridge_graph(P: Polytope, mode: str = "exact"):
    """Adjacency dict of the facet-ridge graph, plus the underlying complex."""
    complex_ = facet_enumeration(P, mode)
    return complex_.adjacency_dict(), complex_


def vertex_edge_graph(P: Polytope, mode: str = "exact"):
    """Adjacency dict of the vertex-edge graph of P (exact by default)."""
    complex_ = facet_enumeration(P, mode)
    masks = complex_.facet_masks()
    full = (1 << P.n) - 1
    adjacency = {i: set() for i in range(P.n)}
    for i, j in itertools.combinations(range(P.n), 2):
        pair = (1 << i) | (1 << j)
        smallest = full
        hit = False
        for m in masks:
            if m & pair == pair:
                smallest &= m
                hit = True
        if hit and smallest == pair:
            adjacency[i].add(j)
            adjacency[j].add(i)
    return adjacency


def polar_dual(P: Polytope) -> Polytope:
    """Polar dual after translating the vertex centroid to the origin.

    The dual has one vertex per facet of P, and its vertex-edge graph equals
    the facet-ridge graph of P.
    """
    complex_ = facet_enumeration(P, "exact")
    c = P.centroid()
    rows = []
    for f in complex_.facets:
        a = [Fraction(x) for x in f.plane.normal]
        b = Fraction(f.plane.offset)
        if f.inside == GE:
            a = [-x for x in a]
            b = -b
        # inside is now a . x <= b; after translating by c the offset is b - a . c
        shifted = b - sum(ai * ci for ai, ci in zip(a, c))
        if shifted <= 0:
            raise DegenerateInput("centroid is not strictly inside the polytope")
        rows.append([ai / shifted for ai in a])
    return Polytope(rows)


def proper_spanning_check(P: Polytope):
    """Diagnostic: is every row a vertex of the hull, and is the hull full-dimensional?

    Returns a SpanningReport rather than raising.
    """
    from .lp import exact_point_in_hull

    V = P.int_vertices()
    n, d = P.n, P.d
    rank = affine_rank(V)
    if rank != d + 1:
        return SpanningReport(ok=False, rank_deficient=True, offending=[])
    offending = []
    for i in range(n):
        others = [V[j] for j in range(n) if j != i]
        if exact_point_in_hull(V[i], others):
            offending.append(i)
    return SpanningReport(ok=not offending, rank_deficient=False, offending=offending)


@dataclass
class SpanningReport:
    ok: bool
    rank_deficient: bool
    offending: list
