"""Scenario objectives, fitness evaluation and the multi-objective scheduler.

Each objective evaluates a polytope to a FitnessVector whose ``key`` tuple is
compared lexicographically (bigger is better). For the width search the key
leads with the width itself, so switching the secondary heuristic never
sacrifices attained width; the secondary entries are the configurable
deck-path heuristics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from . import analysis
from .errors import NonGenericFunctional, NotPrismatoid
from .polytope import Polytope


@dataclass
class FitnessVector:
    """Named metrics plus the comparison key under the active objective."""

    active_objective: str
    key: tuple
    width: Optional[int] = None
    defect: Optional[int] = None
    average_width: Optional[float] = None
    monotone_length: Optional[int] = None
    neighbourly_k: Optional[int] = None
    neighbourly_fraction: Optional[float] = None
    hirsch_gap: Optional[int] = None
    values: dict = field(default_factory=dict)
    target_met: bool = False

    def scalar(self) -> float:
        return float(self.key[0]) if self.key else 0.0


@dataclass
class Objective:
    """A named fitness evaluator with its target predicate (maximized)."""

    name: str
    evaluate: Callable[[Polytope, str], FitnessVector]
    describe: str = ""


# ---------------------------------------------------------------------------
# width-search heuristics
#
# Ten registered variants: the deck-to-deck geodesic count (defect), the
# variant-0 average width, and eight further statistics of shortest and
# longest (bounded-length) deck connections. All are tie-breakers behind the
# width itself.

WIDTH_HEURISTICS = {
    "avg_width": lambda s: s["mean_cross_distance"],
    "defect": lambda s: -float(s["defect"]),
    "neighbour_geodesics": lambda s: -float(sum(s["cross_counts"])),
    "walks_min": lambda s: -float(s["walks_w"]),
    "walks_plus1": lambda s: float(s["walks_w1"]),
    "walks_plus2": lambda s: float(s["walks_w2"]),
    "mean_geodesic_count": lambda s: (
        -sum(s["cross_counts"]) / len(s["cross_counts"]) if s["cross_counts"] else 0.0
    ),
    "min_cross_distance": lambda s: float(min(s["cross_distances"], default=0)),
    "max_cross_distance": lambda s: float(max(s["cross_distances"], default=0)),
    "avg_width_incl_self": lambda s: s["mean_cross_distance_incl_self"],
}


def _deck_stats(P: Polytope, mode: str) -> dict:
    Q = analysis.detect_prismatoid(P, mode)
    stats = analysis.deck_path_statistics(Q, mode)
    w = stats["width"]
    flat = {
        "width": w,
        "defect": stats["defect"],
        "cross_distances": stats["cross_distances"],
        "cross_counts": stats["cross_counts"],
        "mean_cross_distance": stats["mean_cross_distance"],
        "walks_w": stats["walks"][w],
        "walks_w1": stats["walks"][w + 1],
        "walks_w2": stats["walks"][w + 2],
    }
    dists = stats["cross_distances"]
    # include-self variant: self pairs contribute distance 0
    selfs = _self_pair_count(Q, mode)
    total = sum(dists)
    flat["mean_cross_distance_incl_self"] = (
        total / (len(dists) + selfs) if (dists or selfs) else 0.0
    )
    return flat


def _self_pair_count(Q, mode):
    from .hull import facet_enumeration

    complex_ = facet_enumeration(Q.polytope, mode)
    adjacency = complex_.adjacency_dict()
    top_idx, bottom_idx = analysis._deck_nodes(Q, complex_)
    return len(set(adjacency[top_idx]) & set(adjacency[bottom_idx]))


def hirsch_objectives(target_width: int = 6) -> list:
    """The ten registered width-search objectives, lexicographic behind width."""
    objectives = []
    for name, metric in WIDTH_HEURISTICS.items():

        def evaluate(P: Polytope, mode: str = "exact", _metric=metric, _name=name) -> FitnessVector:
            stats = _deck_stats(P, mode)
            fv = FitnessVector(
                active_objective=_name,
                key=(stats["width"], _metric(stats)),
                width=stats["width"],
                defect=stats["defect"],
                average_width=stats["mean_cross_distance"],
                values={
                    "walks_w": stats["walks_w"],
                    "walks_w1": stats["walks_w1"],
                    "walks_w2": stats["walks_w2"],
                },
                target_met=stats["width"] >= target_width,
            )
            return fv

        objectives.append(Objective(name=name, evaluate=evaluate,
                                    describe=f"width, then {name}"))
    return objectives


def monotone_objective(known_bound: Optional[int] = None, functional=None) -> Objective:
    """Longest monotone path in the polar dual (searching duals keeps the
    facet count of the primal fixed at n)."""

    def evaluate(P: Polytope, mode: str = "exact") -> FitnessVector:
        length = analysis.monotone_length_dual(P, functional, mode)
        return FitnessVector(
            active_objective="monotone",
            key=(length,),
            monotone_length=length,
            target_met=known_bound is not None and length > known_bound,
        )

    return Objective(name="monotone", evaluate=evaluate,
                     describe="longest monotone dual path")


def neighbourly_objective(d: int, require_non_cyclic: bool = True) -> Objective:
    """k + fraction fitness; the target is full neighbourliness, non-cyclic."""

    def evaluate(P: Polytope, mode: str = "exact") -> FitnessVector:
        k, fraction = analysis.neighbourliness_fitness(P, mode)
        met = k >= d // 2
        if met and require_non_cyclic and mode == "exact":
            met = not is_combinatorially_cyclic(P)
        return FitnessVector(
            active_objective="neighbourly",
            key=(k + fraction,),
            neighbourly_k=k,
            neighbourly_fraction=fraction,
            target_met=met,
        )

    return Objective(name="neighbourly", evaluate=evaluate,
                     describe="largest all-faces subset size plus fraction")


# ---------------------------------------------------------------------------


@dataclass
class ObjectiveSchedule:
    """Round-robin over objectives, advancing after sustained stagnation."""

    objectives: list
    stagnation_threshold: int = 25
    index: int = 0

    def current(self) -> Objective:
        return self.objectives[self.index]

    def next_objective(self, stagnation_count: int) -> int:
        """Return the objective index to use given the failed-attempt count."""
        if stagnation_count >= self.stagnation_threshold:
            self.index = (self.index + 1) % len(self.objectives)
        return self.index


def is_combinatorially_cyclic(P: Polytope) -> bool:
    """Compare P's facet hypergraph with the Gale-evenness facets of C(n, d).

    Equality is taken up to vertex relabeling (bipartite incidence-graph
    isomorphism).
    """
    import networkx as nx

    from .hull import facet_enumeration
    from .shapes import gale_evenness_facets

    complex_ = facet_enumeration(P, "exact")
    ours = [f.vertices for f in complex_.facets]
    reference = gale_evenness_facets(P.n, P.d)
    if len(ours) != len(reference):
        return False
    if sorted(len(f) for f in ours) != sorted(len(f) for f in reference):
        return False

    def incidence(facets, n):
        G = nx.Graph()
        for i in range(n):
            G.add_node(("v", i), kind="v")
        for j, f in enumerate(facets):
            G.add_node(("f", j), kind="f")
            for i in f:
                G.add_edge(("f", j), ("v", i))
        return G

    G1 = incidence(ours, P.n)
    G2 = incidence(reference, P.n)
    return nx.is_isomorphic(G1, G2, node_match=lambda a, b: a["kind"] == b["kind"])
