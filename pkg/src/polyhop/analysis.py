"""Measurements on polytopes: prismatoid structure, width, defect, average-width
variants, neighbourliness, monotone path length, diameter gaps and deck scale
profiles.

All functions are pure; mode="exact" (the default) routes every combinatorial
decision through exact rational arithmetic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import DegenerateDeck, MissingMetric, NonGenericFunctional, NotPrismatoid
from .graphs import bfs_distances, bfs_geodesic_counts, graph_diameter, longest_path_dag, walk_counts
from .hull import FacetComplex, facet_enumeration, face_test, polar_dual, vertex_edge_graph
from .hyperplanes import Hyperplane
from .polytope import Polytope


@dataclass
class Prismatoid:
    """A polytope with two parallel facets (decks) that cover all vertices."""

    polytope: Polytope
    top: frozenset
    bottom: frozenset
    top_plane: Optional[Hyperplane]
    bottom_plane: Optional[Hyperplane]
    ambiguous: bool = False

    @property
    def d(self):
        return self.polytope.d


@dataclass
class ScaleProfile:
    """Extreme PCA eigenvalues of the top deck after whitening the bottom deck."""

    eigen_min: float
    eigen_max: float

    @property
    def ratio(self):
        return self.eigen_max / self.eigen_min


def detect_prismatoid(P: Polytope, mode: str = "exact") -> Prismatoid:
    """Find a pair of parallel facets whose vertices partition all of P's.

    Raises NotPrismatoid when no such pair exists. When several pairs exist
    (e.g. the cube), the first in canonical facet order is returned with
    ``ambiguous`` set.
    """
    complex_ = facet_enumeration(P, mode)
    full = frozenset(range(P.n))
    # group facets by normal direction so only parallel candidates are paired
    groups = {}
    for i, f in enumerate(complex_.facets):
        groups.setdefault(_direction_key(f, complex_.exact), []).append(i)
    pairs = []
    for members in groups.values():
        for i, j in itertools.combinations(members, 2):
            fi, fj = complex_.facets[i], complex_.facets[j]
            if fi.vertices | fj.vertices != full or fi.vertices & fj.vertices:
                continue
            if not _parallel(fi, fj, complex_.exact):
                continue
            pairs.append(tuple(sorted((i, j))))
    if not pairs:
        raise NotPrismatoid(f"no parallel facet pair covers all {P.n} vertices")
    pairs.sort(key=lambda ij: _facet_order_key(complex_, ij))
    i, j = pairs[0]
    fi, fj = complex_.facets[i], complex_.facets[j]
    return Prismatoid(
        polytope=P,
        top=fi.vertices,
        bottom=fj.vertices,
        top_plane=fi.plane,
        bottom_plane=fj.plane,
        ambiguous=len(pairs) > 1,
    )


def _direction_key(f, exact):
    if exact:
        return f.plane.normal
    a = f.float_normal / np.linalg.norm(f.float_normal)
    for x in a:
        if abs(x) > 1e-9:
            if x < 0:
                a = -a
            break
    return tuple(np.round(a, 7))


def _parallel(fi, fj, exact):
    if exact:
        return fi.plane.is_parallel_to(fj.plane)
    a = fi.float_normal / np.linalg.norm(fi.float_normal)
    b = fj.float_normal / np.linalg.norm(fj.float_normal)
    return min(np.linalg.norm(a - b), np.linalg.norm(a + b)) < 1e-9


def _facet_order_key(complex_, pair):
    i, j = pair
    fi, fj = complex_.facets[i], complex_.facets[j]
    if complex_.exact:
        keys = sorted([(fi.plane.normal, fi.plane.offset), (fj.plane.normal, fj.plane.offset)])
        return keys
    return sorted([tuple(sorted(fi.vertices)), tuple(sorted(fj.vertices))])


def _deck_nodes(Q: Prismatoid, complex_: FacetComplex):
    top_idx = bottom_idx = None
    for i, f in enumerate(complex_.facets):
        if f.vertices == Q.top:
            top_idx = i
        elif f.vertices == Q.bottom:
            bottom_idx = i
    if top_idx is None or bottom_idx is None:
        raise NotPrismatoid("deck vertex sets are not facets of the polytope")
    return top_idx, bottom_idx


def width(Q: Prismatoid, mode: str = "exact") -> int:
    """Facet-ridge graph distance between the two deck facets."""
    complex_ = facet_enumeration(Q.polytope, mode)
    top_idx, bottom_idx = _deck_nodes(Q, complex_)
    dist = bfs_distances(complex_.adjacency_dict(), top_idx)
    return dist[bottom_idx]


def defect(Q: Prismatoid, mode: str = "exact", convention: str = "deck-nodes") -> int:
    """Number of shortest deck-to-deck paths in the facet-ridge graph.

    ``deck-nodes`` (the frozen default) counts geodesics between the two deck
    facet nodes themselves. ``deck-neighbours`` counts shortest paths between
    neighbours of the bottom deck and neighbours of the top deck at the
    minimal neighbour-pair distance.
    """
    complex_ = facet_enumeration(Q.polytope, mode)
    adjacency = complex_.adjacency_dict()
    top_idx, bottom_idx = _deck_nodes(Q, complex_)
    if convention == "deck-nodes":
        dist, count = bfs_geodesic_counts(adjacency, top_idx)
        return count[bottom_idx]
    if convention == "deck-neighbours":
        nt = adjacency[top_idx]
        nb = adjacency[bottom_idx]
        runs = {u: bfs_geodesic_counts(adjacency, u) for u in nt}
        lmin = min(runs[u][0][v] for u in nt for v in nb)
        return sum(runs[u][1][v] for u in nt for v in nb if runs[u][0][v] == lmin)
    raise ValueError(f"unknown defect convention {convention!r}")


def average_width(Q: Prismatoid, variant: int = 0, mode: str = "exact",
                  include_equal_pairs: bool = False) -> float:
    """Average-width style heuristics over deck-neighbour pairs.

    Variant 0 is the mean facet-ridge distance d(u, v) over pairs of
    neighbours u of the bottom deck and v of the top deck; by default pairs
    with u == v are excluded (flip ``include_equal_pairs`` to keep them).
    """
    complex_ = facet_enumeration(Q.polytope, mode)
    adjacency = complex_.adjacency_dict()
    top_idx, bottom_idx = _deck_nodes(Q, complex_)
    nb = adjacency[bottom_idx]
    nt = adjacency[top_idx]
    if variant != 0:
        raise ValueError("only variant 0 is defined here; see objectives for the registry")
    total = 0
    count = 0
    for u in nb:
        dist = bfs_distances(adjacency, u)
        for v in nt:
            if u == v and not include_equal_pairs:
                continue
            total += dist[v]
            count += 1
    if count == 0:
        raise MissingMetric("decks have no neighbouring facets")
    return total / count


def deck_path_statistics(Q: Prismatoid, mode: str = "exact") -> dict:
    """Shared inputs for the configurable width heuristics.

    Computes deck-to-deck geodesic data and bounded-length walk counts once so
    the objective registry can combine them cheaply.
    """
    complex_ = facet_enumeration(Q.polytope, mode)
    adjacency = complex_.adjacency_dict()
    top_idx, bottom_idx = _deck_nodes(Q, complex_)
    dist_t, count_t = bfs_geodesic_counts(adjacency, top_idx)
    w = dist_t[bottom_idx]
    nt = adjacency[top_idx]
    nb = adjacency[bottom_idx]
    cross = []
    runs = {u: bfs_geodesic_counts(adjacency, u) for u in nb}
    for u in nb:
        dist_u, count_u = runs[u]
        for v in nt:
            if u == v:
                continue
            cross.append((dist_u[v], count_u[v]))
    stats = {
        "width": w,
        "defect": count_t[bottom_idx],
        "cross_distances": [c[0] for c in cross],
        "cross_counts": [c[1] for c in cross],
        "walks": {
            L: walk_counts(adjacency, top_idx, bottom_idx, L) for L in (w, w + 1, w + 2)
        },
        "mean_cross_distance": (sum(c[0] for c in cross) / len(cross)) if cross else 0.0,
    }
    return stats


def neighbourliness_fitness(P: Polytope, mode: str = "exact"):
    """(k, fraction): largest k with all <=k-subsets faces, plus the share of
    (k+1)-subsets that are faces. The scalar fitness is k + fraction."""
    n = P.n
    complex_ = facet_enumeration(P, mode)
    k = 0
    for size in range(1, n):
        subsets = list(itertools.combinations(range(n), size))
        good = 0
        for S in subsets:
            mask = 0
            for i in S:
                mask |= 1 << i
            if complex_.smallest_face_mask(mask) == mask:
                good += 1
        if good == len(subsets):
            k = size
            continue
        return k, good / len(subsets)
    return n - 1, 0.0


def monotone_path_length(P: Polytope, functional=None, mode: str = "exact",
                         tie_break: str = "error") -> int:
    """Longest strictly increasing vertex-edge path under a linear functional.

    The vertex-edge graph is oriented by increasing functional value and the
    longest path is found by dynamic programming over the topological order.
    Ties raise NonGenericFunctional unless ``tie_break="lex"`` is selected, in
    which case values are compared lexicographically with the coordinates.
    """
    if functional is None:
        functional = [1] + [0] * (P.d - 1)
    c = [Fraction(x) for x in functional]
    values = []
    for i, row in enumerate(P.vertices):
        v = sum(ci * xi for ci, xi in zip(c, row))
        values.append((v, tuple(row), i))
    if tie_break == "lex":
        keyed = sorted(values)
        keys = {i: (v, row) for v, row, i in values}
        if len({(v, row) for v, row, _ in values}) != P.n:
            raise NonGenericFunctional("duplicate vertices under lexicographic tie-break")
        greater = lambda i, j: keys[i] > keys[j]
        order = [i for _, _, i in keyed]
    else:
        plain = {i: v for v, _, i in values}
        if len(set(plain.values())) != P.n:
            raise NonGenericFunctional("two vertices share the functional value")
        greater = lambda i, j: plain[i] > plain[j]
        order = [i for _, _, i in sorted(values)]
    adjacency = vertex_edge_graph(P, mode)
    successors = {i: [j for j in adjacency[i] if greater(j, i)] for i in range(P.n)}
    return longest_path_dag(order, successors)


def monotone_length_dual(P: Polytope, functional=None, mode: str = "exact") -> int:
    """Longest monotone path in the polar dual of P, without building the dual.

    The dual's vertex-edge graph is P's facet-ridge graph, and each dual vertex
    is the facet normal scaled by its centroid-shifted offset; the DAG dynamic
    program runs directly on the facet adjacency. The search polytope has one
    facet per dual vertex, so this scores duals with exactly n facets.
    """
    if functional is None:
        functional = [1] + [0] * (P.d - 1)
    complex_ = facet_enumeration(P, mode)
    adjacency = complex_.adjacency_dict()
    c = P.centroid()
    values = []
    if complex_.exact:
        fn = [Fraction(x) for x in functional]
        for f in complex_.facets:
            a = [Fraction(x) for x in f.plane.normal]
            b = Fraction(f.plane.offset)
            if f.inside == ">=":
                a = [-x for x in a]
                b = -b
            shifted = b - sum(ai * ci for ai, ci in zip(a, c))
            values.append(sum(fi * ai for fi, ai in zip(fn, a)) / shifted)
    else:
        cf = np.array([float(x) for x in c])
        fn = np.array([float(x) for x in functional])
        for f in complex_.facets:
            shifted = f.float_offset - float(np.dot(f.float_normal, cf))
            values.append(float(np.dot(fn, f.float_normal)) / shifted)
    if len(set(values)) != len(values):
        raise NonGenericFunctional("two dual vertices share the functional value")
    order = sorted(range(len(values)), key=lambda i: values[i])
    successors = {i: [j for j in adjacency[i] if values[j] > values[i]] for i in adjacency}
    return longest_path_dag(order, successors)


def hirsch_gap(P: Polytope, mode: str = "exact") -> dict:
    """Diameter slack against the n - d bound, in both polytope graphs.

    For prismatoid inputs the report also carries width - d and, when that is
    positive, the implied counterexample dimension nVertices - d.
    """
    complex_ = facet_enumeration(P, mode)
    fr_adj = complex_.adjacency_dict()
    fr_diameter = graph_diameter(fr_adj)
    ve_diameter = graph_diameter(vertex_edge_graph(P, mode))
    n_facets = len(complex_.facets)
    report = {
        "facet_ridge_diameter": fr_diameter,
        "vertex_edge_diameter": ve_diameter,
        "n_facets": n_facets,
        # primal reading: P's own graph diameter against its facet count
        "gap": ve_diameter - (n_facets - P.d),
        # dual reading: the facet-ridge graph is the dual's vertex-edge graph,
        # and the dual has one facet per vertex of P
        "dual_gap": fr_diameter - (P.n - P.d),
    }
    try:
        Q = detect_prismatoid(P, mode)
    except NotPrismatoid:
        return report
    w = width(Q, mode)
    report["width"] = w
    report["width_gap"] = w - P.d
    if w - P.d > 0:
        report["implied_dimension"] = P.n - P.d
    return report


def pca_scale_profile(Q: Prismatoid) -> ScaleProfile:
    """Whiten the bottom deck's in-plane coordinates; report the top deck's
    extreme PCA eigenvalues under the same map."""
    P = Q.polytope
    pts = P.float_vertices()
    top = pts[sorted(Q.top)]
    bottom = pts[sorted(Q.bottom)]
    normal = _deck_normal_float(Q)
    _, _, vt = np.linalg.svd(normal[None, :])
    basis = vt[1:].T  # d x (d-1) orthonormal, shared by the parallel decks

    def in_plane(deck):
        centered = deck - deck.mean(axis=0)
        return centered @ basis

    yb = in_plane(bottom)
    yt = in_plane(top)
    k = basis.shape[1]
    cb = yb.T @ yb / len(yb)
    eigvals_b, eigvecs_b = np.linalg.eigh(cb)
    if eigvals_b[0] <= 1e-12 * max(eigvals_b[-1], 1.0):
        raise DegenerateDeck("bottom deck does not span its plane")
    whiten = eigvecs_b @ np.diag(eigvals_b**-0.5) @ eigvecs_b.T
    yt_w = yt @ whiten
    ct = yt_w.T @ yt_w / len(yt_w)
    eig_t = np.linalg.eigvalsh(ct)
    if eig_t[0] <= 0:
        raise DegenerateDeck("top deck does not span its plane")
    return ScaleProfile(eigen_min=float(eig_t[0]), eigen_max=float(eig_t[-1]))


def _deck_normal_float(Q: Prismatoid) -> np.ndarray:
    if Q.top_plane is not None:
        return Q.top_plane.float_normal()
    pts = Q.polytope.float_vertices()
    top = pts[sorted(Q.top)]
    centered = top - top.mean(axis=0)
    _, _, vt = np.linalg.svd(centered)
    return vt[-1]


# ---------------------------------------------------------------------------
# verification report


def verification_report(P: Polytope, defect_convention: str = "deck-nodes") -> dict:
    """Exact-arithmetic summary used by the verify command and file reports."""
    report = {"n": P.n, "d": P.d}
    gap = hirsch_gap(P, "exact")
    report["diameter"] = gap["facet_ridge_diameter"]
    report["vertexEdgeDiameter"] = gap["vertex_edge_diameter"]
    report["nFacets"] = gap["n_facets"]
    report["hirschGap"] = gap["gap"]
    try:
        Q = detect_prismatoid(P, "exact")
        report["isPrismatoid"] = True
        report["deckSizes"] = [len(Q.top), len(Q.bottom)]
        report["width"] = width(Q, "exact")
        report["defect"] = defect(Q, "exact", defect_convention)
        report["widthGap"] = report["width"] - P.d
        if report["width"] - P.d > 0:
            report["impliedDimension"] = P.n - P.d
        else:
            report["impliedDimension"] = None
        try:
            profile = pca_scale_profile(Q)
            report["scaleProfile"] = {
                "eigenMin": profile.eigen_min,
                "eigenMax": profile.eigen_max,
            }
        except DegenerateDeck:
            report["scaleProfile"] = None
    except NotPrismatoid:
        report["isPrismatoid"] = False
        report["width"] = None
        report["defect"] = None
        report["impliedDimension"] = None
        report["scaleProfile"] = None
    if P.n <= 14:
        k, fraction = neighbourliness_fitness(P, "exact")
        report["neighbourlyK"] = k
        report["neighbourlyFraction"] = fraction
    else:
        report["neighbourlyK"] = None
    return report
