"""Hyperplanes, signed constraints, regions and inscribed balls.

A hyperplane is stored in canonical integer form: the normal and offset are
collectively gcd-reduced and the first nonzero normal entry is positive, so
equal hyperplanes compare (and hash) equal. That makes arrangement
deduplication a plain dict lookup.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import AffinelyDependent
from .linalg import clear_denominators, normal_through, reduce_int_vector

LE = "<="
GE = ">="


def _canonicalize(normal, offset):
    values = reduce_int_vector(list(normal) + [offset])
    a, b = values[:-1], values[-1]
    for x in a:
        if x != 0:
            if x < 0:
                a = [-v for v in a]
                b = -b
            break
    return tuple(a), b


@dataclass(frozen=True)
class Hyperplane:
    """Affine hyperplane {x : normal . x == offset} with integer canonical data."""

    normal: tuple
    offset: int

    @staticmethod
    def from_exact(normal, offset) -> "Hyperplane":
        """Build from rational coefficients, canonicalizing to integers."""
        fracs = [Fraction(x) for x in normal] + [Fraction(offset)]
        rows, _ = clear_denominators([fracs])
        a, b = _canonicalize(rows[0][:-1], rows[0][-1])
        if all(x == 0 for x in a):
            raise AffinelyDependent("zero normal vector")
        return Hyperplane(a, b)

    @property
    def dim(self) -> int:
        return len(self.normal)

    def evaluate(self, point) -> Fraction:
        """Exact signed value normal . point - offset."""
        return sum(Fraction(a) * Fraction(x) for a, x in zip(self.normal, point)) - self.offset

    def float_normal(self) -> np.ndarray:
        return np.array(self.normal, dtype=float)

    def float_offset(self) -> float:
        return float(self.offset)

    def distance_to(self, point) -> float:
        """Euclidean float distance from a point to the plane."""
        a = self.float_normal()
        return abs(float(np.dot(a, np.asarray(point, dtype=float))) - self.offset) / float(
            np.linalg.norm(a)
        )

    def is_parallel_to(self, other: "Hyperplane") -> bool:
        """Exact parallelism test (canonical normals equal up to sign, hence equal)."""
        return self.normal == other.normal

    def __repr__(self):
        terms = " + ".join(f"{a}*x{i}" for i, a in enumerate(self.normal) if a != 0)
        return f"Hyperplane({terms} = {self.offset})"


def hyperplane_through(points: Sequence) -> Hyperplane:
    """The unique hyperplane through d affinely independent d-dimensional points.

    Raises AffinelyDependent when the points do not determine one.
    """
    pts = [list(p) for p in points]
    d = len(pts[0])
    if len(pts) != d:
        raise AffinelyDependent(f"need exactly {d} points in dimension {d}, got {len(pts)}")
    rows = [[Fraction(x) for x in p] for p in pts]
    int_rows, den = clear_denominators(rows)
    result = normal_through(int_rows)
    if result is None:
        raise AffinelyDependent("points are affinely dependent")
    # the plane found is for the den-scaled points: a . (den p) = b, so rescale
    a, b = result
    a, b = _canonicalize([x * den for x in a], b)
    return Hyperplane(a, b)


@dataclass(frozen=True)
class SignedConstraint:
    """A hyperplane with an inequality sense, read as `normal . x  sense  offset`."""

    plane: Hyperplane
    sense: str  # LE or GE

    def as_le(self):
        """Float (a, b) with the constraint written as a . x <= b."""
        a = self.plane.float_normal()
        b = self.plane.float_offset()
        if self.sense == GE:
            return -a, -b
        return a, b

    def satisfied_exactly(self, point) -> bool:
        v = self.plane.evaluate(point)
        return v <= 0 if self.sense == LE else v >= 0


@dataclass
class Region:
    """Intersection of halfspaces, optionally restricted to an equality flat."""

    constraints: list = field(default_factory=list)
    equality: Optional[Hyperplane] = None

    @property
    def dim(self) -> int:
        if self.constraints:
            return self.constraints[0].plane.dim
        return self.equality.dim

    def le_matrices(self):
        """All inequality constraints as float arrays (A, b) with A x <= b."""
        rows = [c.as_le() for c in self.constraints]
        A = np.array([r[0] for r in rows], dtype=float)
        b = np.array([r[1] for r in rows], dtype=float)
        return A, b

    def contains_exactly(self, point) -> bool:
        if self.equality is not None and self.equality.evaluate(point) != 0:
            return False
        return all(c.satisfied_exactly(point) for c in self.constraints)

    def planes(self):
        return [c.plane for c in self.constraints]


@dataclass
class Ball:
    """Inscribed ball candidate: float center during search, exact on demand."""

    center: np.ndarray
    radius: float

    def exact_center(self):
        """Center as exact rationals via the floats' binary values."""
        return tuple(Fraction(float(x)) for x in self.center)
