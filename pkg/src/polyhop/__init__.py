"""polyhop: a search engine for polytopes with extremal combinatorial properties.

The exact geometry kernel (facet enumeration, face tests, graphs, duals,
Chebyshev centers) backs a population of concurrent search agents that modify
polytopes by hopping vertices into cells of the hyperplane arrangement spanned
by the current vertices. An optional external scoring service can bias which
cells are tried.
"""

from importlib import resources

from .analysis import (
    Prismatoid,
    ScaleProfile,
    average_width,
    defect,
    detect_prismatoid,
    hirsch_gap,
    monotone_path_length,
    neighbourliness_fitness,
    pca_scale_profile,
    verification_report,
    width,
)
from .errors import (
    AffinelyDependent,
    DegenerateDeck,
    DegenerateInput,
    Disconnected,
    FuseTripped,
    Infeasible,
    NonGenericFunctional,
    NoRegionFound,
    NotPrismatoid,
    ParseError,
    PolyhopError,
    SeedingFailed,
    Unbounded,
)
from .graphs import graph_diameter
from .hull import (
    FacetComplex,
    face_test,
    facet_enumeration,
    facet_ridge_graph,
    polar_dual,
    proper_spanning_check,
    vertex_edge_graph,
)
from .hyperplanes import Ball, Hyperplane, Region, SignedConstraint, hyperplane_through
from .lp import chebyshev_center, region_is_bounded
from .polytope import (
    Polytope,
    format_polytope_text,
    load_polytope,
    parse_polytope_text,
    save_polytope,
)

__version__ = "0.1.0"


def reference_prismatoid_path():
    """Path to the bundled 24-vertex width-6 reference prismatoid."""
    return resources.files("polyhop").joinpath("data/prismatoid24.txt")


def reference_prismatoid() -> Polytope:
    """The bundled 24-vertex width-6 reference prismatoid."""
    return parse_polytope_text(reference_prismatoid_path().read_text())
