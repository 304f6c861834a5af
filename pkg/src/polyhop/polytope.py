"""Vertex-described polytopes with exact rational coordinates.

The exact matrix is the source of truth; float and integer-scaled views are
cached for the fast paths. Instances are treated as immutable: every
modification constructs a new Polytope.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .errors import DegenerateInput, ParseError
from .linalg import affine_rank, clear_denominators


class Polytope:
    """n x d matrix of exact rational vertices spanning dimension d."""

    def __init__(self, vertices, validate=True):
        rows = []
        for row in vertices:
            rows.append(tuple(_to_fraction(x) for x in row))
        if not rows:
            raise DegenerateInput("no vertices")
        d = len(rows[0])
        if any(len(r) != d for r in rows):
            raise DegenerateInput("ragged vertex matrix")
        self.vertices = tuple(rows)
        self.n = len(rows)
        self.d = d
        self._float = None
        self._int_form = None
        self._facets = {}  # mode -> FacetComplex, attached by hull.facet_enumeration
        if validate:
            if self.n < d + 1:
                raise DegenerateInput(f"{self.n} vertices cannot span dimension {d}")
            if affine_rank(self.int_vertices()) != d + 1:
                raise DegenerateInput("vertices do not affinely span the full dimension")

    # -- cached views -------------------------------------------------------

    def float_vertices(self) -> np.ndarray:
        if self._float is None:
            self._float = np.array([[float(x) for x in row] for row in self.vertices])
            self._float.setflags(write=False)
        return self._float

    def int_vertices(self):
        """Integer-scaled vertex matrix (rows * scale). Combinatorics-preserving."""
        if self._int_form is None:
            self._int_form = clear_denominators(self.vertices)
        return self._int_form[0]

    def int_scale(self) -> int:
        self.int_vertices()
        return self._int_form[1]

    # -- construction helpers ----------------------------------------------

    def replace_vertex(self, index, point) -> "Polytope":
        rows = list(self.vertices)
        rows[index] = tuple(_to_fraction(x) for x in point)
        return Polytope(rows, validate=False)

    def add_vertex(self, point) -> "Polytope":
        return Polytope(list(self.vertices) + [tuple(_to_fraction(x) for x in point)], validate=False)

    def delete_vertex(self, index) -> "Polytope":
        rows = [r for i, r in enumerate(self.vertices) if i != index]
        return Polytope(rows, validate=False)

    def centroid(self):
        return tuple(sum(row[j] for row in self.vertices) / self.n for j in range(self.d))

    # -- identity -----------------------------------------------------------

    def __eq__(self, other):
        return isinstance(other, Polytope) and self.vertices == other.vertices

    def __hash__(self):
        return hash(self.vertices)

    def __repr__(self):
        return f"Polytope(n={self.n}, d={self.d})"


def _to_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        # exact binary value of the float
        return Fraction(x)
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, np.floating):
        return Fraction(float(x))
    return Fraction(str(x))


# -- text format -------------------------------------------------------------
#
# First line: "n d". Then n lines of d space-separated values, each either a
# decimal literal or a "p/q" rational. Decimals parse as exact rationals.


def parse_polytope_text(text: str) -> Polytope:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ParseError("empty polytope file")
    head = lines[0].split()
    if len(head) != 2:
        raise ParseError(f"expected header 'n d', got {lines[0]!r}")
    try:
        n, d = int(head[0]), int(head[1])
    except ValueError as exc:
        raise ParseError(f"bad header {lines[0]!r}") from exc
    if len(lines) - 1 != n:
        raise ParseError(f"expected {n} vertex lines, found {len(lines) - 1}")
    rows = []
    for ln in lines[1 : n + 1]:
        toks = ln.split()
        if len(toks) != d:
            raise ParseError(f"expected {d} values per line, got {ln!r}")
        try:
            rows.append([Fraction(t) for t in toks])
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"bad value in line {ln!r}") from exc
    return Polytope(rows)


def load_polytope(path) -> Polytope:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_polytope_text(fh.read())


def format_polytope_text(P: Polytope) -> str:
    lines = [f"{P.n} {P.d}"]
    for row in P.vertices:
        lines.append(" ".join(_format_value(x) for x in row))
    return "\n".join(lines) + "\n"


def save_polytope(P: Polytope, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_polytope_text(P))


def _format_value(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"
