"""Exception types shared across the library."""


class PolyhopError(Exception):
    """Base class for all library errors."""


class AffinelyDependent(PolyhopError):
    """The given points do not determine a unique hyperplane."""


class DegenerateInput(PolyhopError):
    """Input polytope violates its invariants (rank, vertex count, spanning)."""


class DegenerateDeck(PolyhopError):
    """A deck of a prismatoid is rank deficient within its plane."""


class NotPrismatoid(PolyhopError):
    """No pair of parallel facets covers all vertices."""


class Disconnected(PolyhopError):
    """Graph operation requires a connected graph."""


class Infeasible(PolyhopError):
    """Constraint region is empty."""


class Unbounded(PolyhopError):
    """Objective or region is unbounded."""


class NonGenericFunctional(PolyhopError):
    """Two vertices share the same value of the linear functional."""


class FuseTripped(PolyhopError):
    """A safety fuse (iteration or time budget) was exceeded."""


class NoRegionFound(PolyhopError):
    """No admissible hop region was found within the sampling budget."""


class SeedingFailed(PolyhopError):
    """Random seeding failed to produce a valid polytope."""


class ParseError(PolyhopError):
    """A file could not be parsed in the expected format."""


class MissingMetric(PolyhopError):
    """A fitness vector lacks a metric required by the operation."""
