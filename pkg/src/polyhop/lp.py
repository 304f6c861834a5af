"""Linear programming backends: float Chebyshev centers and an exact feasibility simplex.

The float side rides scipy's HiGHS solver. The exact side is a small
fraction-arithmetic phase-1 simplex with Bland's rule, used for
point-in-hull certificates and final verification.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from .errors import Infeasible, Unbounded
from .hyperplanes import Ball, Region

_ZERO_ROW = 1e-12


def chebyshev_center(region: Region) -> Ball:
    """Center and radius of the largest ball inscribed in the region.

    With an equality plane present, the center is confined to the flat and the
    radius is measured within it (constraints are reduced to an orthonormal
    parametrization of the flat first).

    Raises Infeasible when the region is empty and Unbounded when the radius
    grows without limit.
    """
    A, b = region.le_matrices()
    if region.equality is not None:
        A, b, basis, origin = _reduce_to_flat(region, A, b)
    else:
        basis = None
        origin = None
    A, b = _normalize_rows(A, b)
    m, k = A.shape
    if m == 0:
        raise Unbounded("no effective constraints")

    cost = np.zeros(k + 1)
    cost[k] = -1.0
    A_ub = np.hstack([A, np.ones((m, 1))])  # unit normals: the slack term is r itself
    bounds = [(None, None)] * k + [(0, None)]
    res = linprog(cost, A_ub=A_ub, b_ub=b, bounds=bounds, method="highs")
    if res.status == 2:
        raise Infeasible("empty region")
    if res.status == 3:
        raise Unbounded("inscribed radius is unbounded")
    if not res.success:
        raise Infeasible(f"LP failed: {res.message}")
    y = res.x[:k]
    r = float(res.x[k])
    if basis is not None:
        center = origin + basis @ y
    else:
        center = y
    return Ball(center=np.asarray(center, dtype=float), radius=r)


def _normalize_rows(A, b):
    """Scale constraint rows to unit normals, dropping (and checking) zero rows."""
    keep = []
    norms = np.linalg.norm(A, axis=1) if len(A) else np.array([])
    for i in range(len(A)):
        if norms[i] < _ZERO_ROW:
            if b[i] < -1e-9:
                raise Infeasible("constraint parallel to the flat excludes it")
            continue
        keep.append(i)
    if not keep:
        return A[:0], b[:0]
    A = A[keep] / norms[keep, None]
    b = b[keep] / norms[keep]
    return A, b


def region_is_bounded(region: Region) -> bool:
    """True iff the region (within its equality flat, if any) is bounded."""
    A, b = region.le_matrices()
    if region.equality is not None:
        A, b, _, _ = _reduce_to_flat(region, A, b)
    A, b = _normalize_rows(A, b)
    m, k = A.shape
    if m == 0:
        return False
    for j in range(k):
        for sign in (1.0, -1.0):
            cost = np.zeros(k)
            cost[j] = sign
            res = linprog(cost, A_ub=A, b_ub=b, bounds=[(None, None)] * k, method="highs")
            if res.status == 3:
                return False
            if res.status == 2:
                return True  # empty is bounded; callers reject it at the LP step
    return True


def _reduce_to_flat(region: Region, A, b):
    """Parametrize {x : n . x == c} orthonormally and restrict constraints to it."""
    n = region.equality.float_normal()
    c = region.equality.float_offset()
    nn = float(np.dot(n, n))
    origin = n * (c / nn)
    # orthonormal basis of the orthogonal complement of n
    _, _, vt = np.linalg.svd(n[None, :])
    basis = vt[1:].T  # d x (d-1)
    A_flat = A @ basis
    b_flat = b - A @ origin
    return A_flat, b_flat, basis, origin


def ball_feasible_exact(region: Region, center, radius: Fraction, shrink=Fraction(1)) -> bool:
    """Exact check that the ball of radius shrink*radius about center fits in the region.

    center entries and radius are converted to exact rationals; the norm
    comparison is done on squares so no roots are needed.
    """
    c = [Fraction(x) for x in center]
    r = Fraction(radius) * shrink
    if region.equality is not None and region.equality.evaluate(c) != 0:
        return False
    r2 = r * r
    for con in region.constraints:
        a = [Fraction(x) for x in con.plane.normal]
        b = Fraction(con.plane.offset)
        val = sum(ai * ci for ai, ci in zip(a, c))
        slack = (b - val) if con.sense == "<=" else (val - b)
        if slack < 0:
            return False
        norm2 = sum(ai * ai for ai in a)
        if region.equality is not None:
            # within-flat norm: subtract the component along the flat normal
            ne = [Fraction(x) for x in region.equality.normal]
            ne2 = sum(x * x for x in ne)
            proj = sum(ai * ni for ai, ni in zip(a, ne))
            norm2 = norm2 - proj * proj / ne2
        if slack * slack < r2 * norm2:
            return False
    return True


# ---------------------------------------------------------------------------
# exact feasibility simplex


def exact_point_in_hull(point, points) -> bool:
    """Exact test whether `point` lies in the convex hull of `points`.

    Solves the phase-1 LP for lambda >= 0, sum lambda == 1,
    sum lambda * points == point, in rational arithmetic.
    """
    pts = [list(map(Fraction, p)) for p in points]
    p = list(map(Fraction, point))
    d = len(p)
    m = len(pts)
    if m == 0:
        return False
    # rows: d coordinate equations plus the convexity equation
    A = [[pts[j][i] for j in range(m)] for i in range(d)]
    A.append([Fraction(1)] * m)
    b = p + [Fraction(1)]
    return exact_equality_feasible(A, b)


def exact_equality_feasible(A, b) -> bool:
    """Phase-1 simplex with Bland's rule: does {x >= 0 : A x == b} have a point?"""
    rows = len(A)
    cols = len(A[0]) if rows else 0
    T = []
    rhs = []
    for i in range(rows):
        row = [Fraction(x) for x in A[i]]
        bi = Fraction(b[i])
        if bi < 0:
            row = [-x for x in row]
            bi = -bi
        T.append(row)
        rhs.append(bi)
    basis = [cols + i for i in range(rows)]  # artificial variables
    # reduced objective: w = sum(rhs) - sum_j (col sum) x_j
    obj = [sum(T[i][j] for i in range(rows)) for j in range(cols)]
    w = sum(rhs)

    while True:
        enter = None
        for j in range(cols):
            if obj[j] > 0:
                enter = j
                break
        if enter is None:
            break
        leave = None
        best = None
        for i in range(rows):
            if T[i][enter] > 0:
                ratio = rhs[i] / T[i][enter]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave is None:
            # phase-1 objective bounded below by 0; cannot be unbounded
            break
        piv = T[leave][enter]
        T[leave] = [x / piv for x in T[leave]]
        rhs[leave] = rhs[leave] / piv
        for i in range(rows):
            if i != leave and T[i][enter] != 0:
                f = T[i][enter]
                T[i] = [T[i][j] - f * T[leave][j] for j in range(cols)]
                rhs[i] = rhs[i] - f * rhs[leave]
        if obj[enter] != 0:
            f = obj[enter]
            obj = [obj[j] - f * T[leave][j] for j in range(cols)]
            w = w - f * rhs[leave]
        basis[leave] = enter
    return w == 0
