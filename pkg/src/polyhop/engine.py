"""The single-agent hop step: arrangement-guided vertex modification.

One step samples a cell of the vertex-spanned hyperplane arrangement (guided
by a plane distribution), refines its inscribed ball until no arrangement
plane comes within ``refinement_factor * radius`` of the center, builds
candidate polytopes by hopping vertices to that center, and keeps the best
candidate whose exact fitness does not regress.

Search-time screening runs in floats; the winning candidate is confirmed in
exact arithmetic before it is returned.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .arrangement import ArrangementCache, enumerate_arrangement
from .errors import FuseTripped, Infeasible, MissingMetric, NoRegionFound, Unbounded
from .hull import facet_enumeration
from .hyperplanes import GE, LE, Ball, Hyperplane, Region, SignedConstraint
from .lp import chebyshev_center, region_is_bounded
from .objectives import FitnessVector, Objective
from .policy import score_hyperplanes
from .polytope import Polytope
from .repository import (
    LABEL_GEOM_REJECTED,
    LABEL_NO_SUCCESS,
    LABEL_SUCCESS,
    HopSample,
    RepositoryEntry,
    snapshot_vertices,
)


@dataclass
class GuardConfig:
    """Geometric degeneration guards and safety fuses."""

    max_abs_coordinate: float = 1e6
    min_facet_angle: float = 1e-6
    max_aspect_ratio: float = 1e8
    max_while_iterations: int = 200
    per_step_timeout: float = 30.0
    # extras, all documented defaults rather than tuned values
    max_region_attempts: int = 40
    refinement_factor: float = 0.8
    min_ball_radius: float = 1e-12
    snap_digits: int = 9
    rescale_coordinate_threshold: float = 100.0
    rescale_aspect_threshold: float = 1e4
    delete_candidates: int = 1


@dataclass
class HopProposal:
    """A finalized hop target: cell center, radius, region and boundary planes."""

    center: np.ndarray
    radius: float
    region: Region
    deck: Optional[str]
    source_planes: list
    exact_center: tuple = ()


@dataclass
class Candidate:
    polytope: Polytope
    kind: str  # replace | add | delete
    index: Optional[int]


@dataclass
class StepResult:
    polytope: Optional[Polytope]
    fitness: Optional[FitnessVector]
    cache: Optional[ArrangementCache]
    samples: list
    kind: Optional[str] = None
    reason: str = ""
    proposal: Optional[HopProposal] = None


def proposal_min_margin(cache: ArrangementCache, proposal: HopProposal) -> float:
    """min over arrangement planes of dist(plane, center) / radius.

    Distances are within the deck flat for deck hops. The refinement loop
    exits only when this is >= the refinement factor.
    """
    A, b, norms = cache.float_equations()
    geo = _FlatGeometry(A, b, norms, proposal.deck)
    dists = geo.distances(np.asarray(proposal.center, dtype=float))
    return float(np.min(dists) / proposal.radius)


def deck_partition(P: Polytope):
    """(top, bottom) index sets for the last-coordinate +-1 deck convention,
    or None when the polytope does not follow it."""
    top, bottom = set(), set()
    for i, row in enumerate(P.vertices):
        if row[-1] == 1:
            top.add(i)
        elif row[-1] == -1:
            bottom.add(i)
        else:
            return None
    if not top or not bottom:
        return None
    return frozenset(top), frozenset(bottom)


def deck_plane(d: int, token: str) -> Hyperplane:
    offset = 1 if token == "top" else -1
    return Hyperplane.from_exact([0] * (d - 1) + [1], offset)


# ---------------------------------------------------------------------------
# hop target construction


def construct_hop_target(P: Polytope, cache: ArrangementCache, pi, rng,
                         guards: GuardConfig, deck_token: Optional[str] = None,
                         deadline: Optional[float] = None):
    """Sample and refine one arrangement cell; returns (proposal, rejected).

    ``rejected`` lists the plane tuples of attempts discarded for geometric
    reasons (unbounded, guard violations, collapsed cells); the caller labels
    them. Raises NoRegionFound when the attempt budget is exhausted and
    FuseTripped when an iteration or time fuse blows.
    """
    planes = cache.sorted_planes()
    A, b, norms = cache.float_equations()
    m = len(planes)
    pi = np.asarray(pi, dtype=float)
    if pi.shape != (m,):
        raise ValueError("distribution does not match the arrangement")
    pi = pi / pi.sum()  # guard against float drift; rng.choice insists on sum 1
    d = P.d
    n_sample = d if deck_token is not None else d + 1
    if m < n_sample:
        raise NoRegionFound("arrangement has too few planes")
    equality = deck_plane(d, deck_token) if deck_token is not None else None

    geo = _FlatGeometry(A, b, norms, deck_token)
    if geo.active.sum() < n_sample:
        raise NoRegionFound("arrangement has too few planes crossing the deck flat")
    # planes with no trace inside the deck flat cannot bound a deck hop; mask
    # them out of the sampler and renormalize
    pi_eff = np.where(geo.active, pi, 0.0)
    total = pi_eff.sum()
    if total <= 0:
        raise NoRegionFound("plane distribution vanishes on the deck flat")
    pi_eff = pi_eff / total

    rejected = []
    for _ in range(guards.max_region_attempts):
        if deadline is not None and time.monotonic() > deadline:
            raise FuseTripped("per-step timeout during region sampling")
        idx = rng.choice(m, size=n_sample, replace=False, p=pi_eff)
        idx = sorted(int(i) for i in idx)
        chosen = [planes[i] for i in idx]
        senses = _bounded_orientation(A[idx], b[idx], norms[idx], deck_token)
        if senses is None:
            rejected.append(chosen)
            continue
        constraints = [
            SignedConstraint(planes[i], sense) for i, sense in zip(idx, senses)
        ]
        region = Region(constraints, equality=equality)
        if not region_is_bounded(region):
            rejected.append(chosen)
            continue
        try:
            ball = chebyshev_center(region)
        except (Infeasible, Unbounded):
            rejected.append(chosen)
            continue
        if ball.radius <= guards.min_ball_radius:
            rejected.append(chosen)
            continue
        if float(np.max(np.abs(ball.center))) > guards.max_abs_coordinate:
            rejected.append(chosen)
            continue

        result = _refine_cell(planes, geo, region, ball, guards, deadline)
        if result is None:
            rejected.append([c.plane for c in region.constraints])
            continue
        region, ball = result
        exact_center = _snap_center(ball, guards, geo)
        if exact_center is None:
            rejected.append([c.plane for c in region.constraints])
            continue
        proposal = HopProposal(
            center=ball.center,
            radius=ball.radius,
            region=region,
            deck=deck_token,
            source_planes=[c.plane for c in region.constraints],
            exact_center=exact_center,
        )
        return proposal, rejected
    raise NoRegionFound(f"no admissible region in {guards.max_region_attempts} attempts")


class _FlatGeometry:
    """Plane distances as seen by the hop ball.

    Without a deck the ball lives in the ambient space and distances are the
    usual point-plane distances. With a deck the ball lives inside the flat
    z = +-1, so distances are measured to each plane's trace within the flat;
    planes parallel to the flat have no trace and are masked out.
    """

    def __init__(self, A, b, norms, deck_token):
        self.deck_token = deck_token
        if deck_token is None:
            self.A = A
            self.b = b
            self.norms = norms
            self.active = np.ones(len(A), dtype=bool)
        else:
            z = 1.0 if deck_token == "top" else -1.0
            self.A = A[:, :-1]
            self.b = b - A[:, -1] * z
            self.norms = np.linalg.norm(self.A, axis=1)
            self.active = self.norms > 1e-12 * np.maximum(norms, 1.0)

    def distances(self, center):
        c = center[:-1] if self.deck_token is not None else center
        with np.errstate(divide="ignore", invalid="ignore"):
            d = np.abs(self.A @ c - self.b) / self.norms
        d[~self.active] = np.inf
        return d


def _bounded_orientation(A, b, norms, deck_token):
    """Senses making the sampled planes bound a nonempty simplex cell.

    k+1 hyperplanes in general position in a k-space bound exactly one
    simplex; its sign pattern follows the kernel of the stacked normals
    (positively spanning orientation), with the global flip fixed by Farkas
    feasibility. None when the planes are too degenerate to decide.
    """
    A = A / norms[:, None]
    b = b / norms
    if deck_token is not None:
        # within the deck flat z = +-1: substitute the fixed last coordinate
        z = 1.0 if deck_token == "top" else -1.0
        b = b - A[:, -1] * z
        A = A[:, :-1]
    k = A.shape[1]
    if A.shape[0] != k + 1:
        return None
    _, s, vt = np.linalg.svd(A.T, full_matrices=True)
    if s[-1] < 1e-9:
        return None  # normals rank-deficient: kernel dim > 1, orientation ambiguous
    mu = vt[-1]  # the one-dimensional kernel of the stacked normals
    if np.min(np.abs(mu)) < 1e-9:
        return None  # a plane is redundant in the positive span; resample
    signs = np.sign(mu)
    t = float(np.dot(signs * np.abs(mu), b))
    if abs(t) < 1e-12:
        return None  # planes (nearly) concurrent
    if t < 0:
        signs = -signs
    return [LE if s > 0 else GE for s in signs]


def _refine_cell(planes, geo: _FlatGeometry, region, ball, guards, deadline):
    """Append the nearest violating arrangement plane until the 0.8r margin holds."""
    factor = guards.refinement_factor
    appended = set()
    for _ in range(guards.max_while_iterations):
        if deadline is not None and time.monotonic() > deadline:
            raise FuseTripped("per-step timeout during cell refinement")
        dists = geo.distances(ball.center)
        violating = np.where(dists < factor * ball.radius)[0]
        if len(violating) == 0:
            return region, ball
        nearest = int(violating[np.argmin(dists[violating])])
        if nearest in appended:
            return None  # numerical stall: an appended wall still reads violated
        appended.add(nearest)
        plane = planes[nearest]
        c = ball.center[:-1] if geo.deck_token is not None else ball.center
        val = float(geo.A[nearest] @ c) - geo.b[nearest]
        region.constraints.append(SignedConstraint(plane, LE if val <= 0 else GE))
        try:
            ball = chebyshev_center(region)
        except (Infeasible, Unbounded):
            return None
        if ball.radius <= guards.min_ball_radius:
            return None
    raise FuseTripped(f"cell refinement exceeded {guards.max_while_iterations} iterations")


def _snap_center(ball: Ball, guards: GuardConfig, geo: _FlatGeometry):
    """Round the center to a short rational grid without leaving the cell."""
    digits = guards.snap_digits
    if ball.radius < 10.0 ** (-digits + 4):
        digits = max(digits, int(np.ceil(-np.log10(ball.radius))) + 4)
    scale = 10**digits
    snapped = list(Fraction(round(float(x) * scale), scale) for x in ball.center)
    if geo.deck_token is not None:
        snapped[-1] = Fraction(1 if geo.deck_token == "top" else -1)
    snapped = tuple(snapped)
    center_f = np.array([float(x) for x in snapped])
    dists = geo.distances(center_f)
    if np.min(dists) <= 0.5 * guards.refinement_factor * ball.radius:
        return None  # snapping moved the point too close to a wall; reject
    # the ball keeps the LP center (which satisfies the full margin); the
    # snapped point is the hop vertex and stays strictly inside the same cell
    return snapped


# ---------------------------------------------------------------------------
# candidates


def generate_candidates(P: Polytope, proposal: HopProposal, mode: str, rng,
                        guards: GuardConfig, decks=None) -> list:
    """Admissible candidate polytopes for one hop target.

    Rigid mode: one candidate per replaced vertex. Flexible mode adds the
    (n+1)-vertex candidate and random deletions. Candidates that demote an
    existing vertex to an interior point, break the deck structure, or violate
    the geometric guards are dropped.
    """
    c = proposal.exact_center
    candidates = []
    if decks is not None and proposal.deck is not None:
        top, bottom = decks
        replace_indices = sorted(top if proposal.deck == "top" else bottom)
    else:
        replace_indices = range(P.n)
    for i in replace_indices:
        candidates.append(Candidate(P.replace_vertex(i, c), "replace", i))
    if mode == "flexible":
        candidates.append(Candidate(P.add_vertex(c), "add", None))
        if P.n > P.d + 1:
            pool = np.array(range(P.n))
            picks = rng.choice(pool, size=min(guards.delete_candidates, P.n), replace=False)
            for i in sorted(int(x) for x in picks):
                candidates.append(Candidate(P.delete_vertex(i), "delete", i))
    return [cand for cand in candidates if _admissible(cand.polytope, guards, decks is not None)]


def _admissible(P: Polytope, guards: GuardConfig, prismatoid: bool) -> bool:
    pts = P.float_vertices()
    if float(np.max(np.abs(pts))) > guards.max_abs_coordinate:
        return False
    if P.n < P.d + 1:
        return False
    # aspect ratio of the vertex cloud
    centered = pts - pts.mean(axis=0)
    svals = np.linalg.svd(centered, compute_uv=False)
    if svals[-1] <= 0 or svals[0] / svals[-1] > guards.max_aspect_ratio:
        return False
    if prismatoid and not _deck_structure_ok(P):
        return False
    return _float_proper_spanning(pts)


def _deck_structure_ok(P: Polytope) -> bool:
    decks = deck_partition(P)
    if decks is None:
        return False
    pts = P.float_vertices()
    for deck in decks:
        if len(deck) < P.d:
            return False
        rows = pts[sorted(deck), : P.d - 1]
        if np.linalg.matrix_rank(rows - rows.mean(axis=0), tol=1e-9) != P.d - 1:
            return False
    return True


def _float_proper_spanning(pts) -> bool:
    n, d = pts.shape
    try:
        hull = ConvexHull(pts, qhull_options="Qt Qx" if d > 4 else "Qt")
    except QhullError:
        return False
    return len(hull.vertices) == n


def facet_angle_ok(P: Polytope, guards: GuardConfig) -> bool:
    """Reject slivers: the dihedral angle at every ridge stays above the guard."""
    try:
        complex_ = facet_enumeration(P, "float")
    except (QhullError, Exception):
        return False
    normals = []
    for f in complex_.facets:
        a = f.float_normal / np.linalg.norm(f.float_normal)
        normals.append(a)
    for i, neighbors in enumerate(complex_.adjacency):
        for j in neighbors:
            if j <= i:
                continue
            cosang = float(np.clip(np.dot(normals[i], normals[j]), -1.0, 1.0))
            # outward normals of adjacent facets: dihedral angle pi - angle(n_i, n_j)
            dihedral = np.pi - np.arccos(cosang)
            if dihedral < guards.min_facet_angle:
                return False
    return True


# ---------------------------------------------------------------------------
# gates


def uptick_downtick_gate(before: FitnessVector, after: FitnessVector, kind: str,
                         downtick_rule=None) -> bool:
    """Admission rule for vertex-count changes.

    Additions must strictly decrease the deck-to-deck geodesic count (defect).
    Deletions run the dual rule on long connections; the default requires the
    bounded-length walk count (length width+2) to increase. The deletion rule
    is pluggable.
    """
    if kind == "add":
        if before.defect is None or after.defect is None:
            raise MissingMetric("uptick gate needs defect on both sides")
        return after.defect < before.defect
    if kind == "delete":
        rule = downtick_rule or _default_downtick
        return rule(before, after)
    return True


def _default_downtick(before: FitnessVector, after: FitnessVector) -> bool:
    b = before.values.get("walks_w2")
    a = after.values.get("walks_w2")
    if b is None or a is None:
        raise MissingMetric("downtick gate needs bounded walk counts")
    return a > b


# ---------------------------------------------------------------------------
# canonical rescale


def canonical_rescale(P: Polytope, prismatoid: bool = False,
                      snap_digits: int = 9) -> Polytope:
    """Whiten the vertex cloud (or the in-deck coordinates of a prismatoid)
    so its covariance is the identity; coordinates are snapped to rationals."""
    pts = P.float_vertices()
    scale = 10**snap_digits
    if prismatoid:
        decks = deck_partition(P)
        if decks is None:
            return P
        inplane = pts[:, : P.d - 1]
        center = inplane.mean(axis=0)
        moved = (inplane - center) @ _whitener(inplane - center)
        rows = []
        for i in range(P.n):
            row = [Fraction(round(float(x) * scale), scale) for x in moved[i]]
            row.append(P.vertices[i][-1])
            rows.append(row)
    else:
        center = pts.mean(axis=0)
        moved = (pts - center) @ _whitener(pts - center)
        rows = [[Fraction(round(float(x) * scale), scale) for x in moved[i]] for i in range(P.n)]
    return Polytope(rows, validate=False)


def _whitener(centered) -> np.ndarray:
    cov = centered.T @ centered / len(centered)
    w, v = np.linalg.eigh(cov)
    w = np.maximum(w, 1e-300)
    return v @ np.diag(w**-0.5) @ v.T


def _needs_rescale(P: Polytope, guards: GuardConfig) -> bool:
    pts = P.float_vertices()
    if float(np.max(np.abs(pts))) > guards.rescale_coordinate_threshold:
        return True
    centered = pts - pts.mean(axis=0)
    svals = np.linalg.svd(centered, compute_uv=False)
    return bool(svals[-1] > 0 and svals[0] / svals[-1] > guards.rescale_aspect_threshold)


def _same_float_combinatorics(P1: Polytope, P2: Polytope) -> bool:
    try:
        c1 = facet_enumeration(P1, "float")
        c2 = facet_enumeration(P2, "float")
    except Exception:
        return False
    return {f.vertices for f in c1.facets} == {f.vertices for f in c2.facets}


# ---------------------------------------------------------------------------
# the agent step


def agent_step(entry: RepositoryEntry, objective: Objective, mode: str,
               guards: GuardConfig, rng, cache: Optional[ArrangementCache] = None,
               client=None, scenario: str = "generic",
               downtick_rule=None) -> StepResult:
    """One full hop attempt on the entry's polytope.

    Returns a StepResult whose polytope is the improved candidate (exactly
    confirmed, never of lower fitness) or None. Deterministic given the rng
    state and inputs. Fuse trips surface as a None result with a reason.
    """
    deadline = time.monotonic() + guards.per_step_timeout
    P = entry.polytope
    fit0 = entry.fitness
    samples: list = []

    decks = deck_partition(P) if scenario == "hirsch" else None
    deck_token = None
    if decks is not None:
        deck_token = "top" if rng.random() < 0.5 else "bottom"

    if cache is None or cache.n != P.n or cache.d != P.d:
        cache = enumerate_arrangement(P)
    planes = cache.sorted_planes()
    pi = score_hyperplanes(
        P, planes, deck_token, client,
        top=decks[0] if decks else None, bottom=decks[1] if decks else None,
    )

    emit = decks is not None

    def emit_samples(plane_list, label):
        if not emit:
            return
        snap = snapshot_vertices(P)
        top, bottom = decks
        for h in plane_list:
            samples.append(
                HopSample(
                    vertices=snap,
                    top=sorted(top),
                    bottom=sorted(bottom),
                    normal=list(h.normal),
                    offset=h.offset,
                    deck=deck_token or "top",
                    label=label,
                    defect=fit0.defect if fit0.defect is not None else -1,
                )
            )

    try:
        proposal, rejected = construct_hop_target(
            P, cache, pi, rng, guards, deck_token, deadline
        )
    except (NoRegionFound, FuseTripped) as exc:
        return StepResult(None, None, cache, samples, reason=f"{type(exc).__name__}: {exc}")
    for plane_list in rejected:
        emit_samples(plane_list, LABEL_GEOM_REJECTED)

    candidates = generate_candidates(P, proposal, mode, rng, guards, decks)

    screened = []
    for order, cand in enumerate(candidates):
        if time.monotonic() > deadline:
            break
        try:
            fv = objective.evaluate(cand.polytope, "float")
        except Exception:
            continue
        if fv.key >= fit0.key:
            screened.append((fv.key, -order, cand))
    screened.sort(reverse=True)

    winner = None
    for key, _, cand in screened:
        if time.monotonic() > deadline:
            break
        try:
            fv_exact = objective.evaluate(cand.polytope, "exact")
        except Exception:
            continue
        if fv_exact.key < fit0.key:
            continue
        if cand.kind in ("add", "delete"):
            try:
                if not uptick_downtick_gate(fit0, fv_exact, cand.kind, downtick_rule):
                    continue
            except MissingMetric:
                continue
        winner = (cand, fv_exact)
        break

    if winner is None:
        emit_samples(proposal.source_planes, LABEL_NO_SUCCESS)
        return StepResult(None, None, cache, samples, reason="no admissible improvement",
                          proposal=proposal)

    cand, fv_exact = winner
    improved = fv_exact.key > fit0.key
    emit_samples(proposal.source_planes, LABEL_SUCCESS if improved else LABEL_NO_SUCCESS)

    out_poly = cand.polytope
    out_cache = None
    if cand.kind == "replace":
        out_cache = enumerate_arrangement(out_poly, cache, cand.index)

    if _needs_rescale(out_poly, guards):
        rescaled = canonical_rescale(out_poly, prismatoid=decks is not None,
                                     snap_digits=guards.snap_digits)
        if _same_float_combinatorics(out_poly, rescaled):
            out_poly = rescaled
            out_cache = None  # coordinates changed wholesale

    return StepResult(out_poly, fv_exact, out_cache, samples, kind=cand.kind,
                      reason="improved" if improved else "lateral", proposal=proposal)
