"""Exact linear algebra over arbitrary-precision integers.

All search-time geometry runs in floats; these routines back the exact
verification path. Matrices are plain lists of lists of Python ints, which
keeps intermediate growth (fraction-free elimination) cheap and overflow-free.
"""

from fractions import Fraction
from math import gcd, lcm


def int_det(rows):
    """Determinant of a square integer matrix by fraction-free (Bareiss) elimination."""
    m = [row[:] for row in rows]
    size = len(m)
    if size == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(size - 1):
        if m[k][k] == 0:
            for i in range(k + 1, size):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[size - 1][size - 1]


def int_rank(rows):
    """Rank of an integer matrix by fraction-free elimination."""
    if not rows:
        return 0
    m = [row[:] for row in rows]
    nrows, ncols = len(m), len(m[0])
    rank = 0
    r = 0
    for c in range(ncols):
        pivot = None
        for i in range(r, nrows):
            if m[i][c] != 0:
                pivot = i
                break
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        for i in range(r + 1, nrows):
            fi, fr = m[i][c], m[r][c]
            m[i] = [m[i][j] * fr - fi * m[r][j] for j in range(ncols)]
        r += 1
        rank += 1
        if r == nrows:
            break
    return rank


def affine_rank(points):
    """Affine rank of integer points (= dim of their affine hull + 1)."""
    pts = list(points)
    if len(pts) <= 1:
        return len(pts)
    base = pts[0]
    diffs = [[p[j] - base[j] for j in range(len(base))] for p in pts[1:]]
    return int_rank(diffs) + 1


def normal_through(points):
    """Primitive normal vector and offset of the hyperplane through d integer points.

    Returns (a, b) with a . p == b for every point, or None when the points are
    affinely dependent. The result is not yet sign-canonicalized.
    """
    d = len(points[0])
    base = points[0]
    diffs = [[p[j] - base[j] for j in range(d)] for p in points[1:]]
    a = []
    for j in range(d):
        minor = [[row[c] for c in range(d) if c != j] for row in diffs]
        a.append((-1) ** j * int_det(minor))
    if all(x == 0 for x in a):
        return None
    b = sum(a[j] * base[j] for j in range(d))
    return a, b


def reduce_int_vector(values):
    """Divide a list of ints by their collective gcd (gcd of all-zero input is 1)."""
    g = 0
    for v in values:
        g = gcd(g, abs(v))
    if g <= 1:
        return list(values)
    return [v // g for v in values]


def common_denominator(fractions):
    """lcm of the denominators of an iterable of Fractions."""
    den = 1
    for f in fractions:
        den = lcm(den, f.denominator)
    return den


def clear_denominators(rows):
    """Scale rows of Fractions to integers by the common denominator.

    Returns (int_rows, denominator). Row i of the result equals rows[i] * denominator.
    """
    den = common_denominator(x for row in rows for x in row)
    out = [[int(x * den) for x in row] for row in rows]
    return out, den


def solve_fraction_system(matrix, rhs):
    """Solve a square Fraction system exactly by Gaussian elimination.

    Raises ZeroDivisionError via pivot search failure (returns None) when singular.
    """
    n = len(matrix)
    m = [[Fraction(x) for x in row] + [Fraction(rhs[i])] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = None
        for i in range(col, n):
            if m[i][col] != 0:
                pivot = i
                break
        if pivot is None:
            return None
        m[col], m[pivot] = m[pivot], m[col]
        pv = m[col][col]
        m[col] = [x / pv for x in m[col]]
        for i in range(n):
            if i != col and m[i][col] != 0:
                f = m[i][col]
                m[i] = [m[i][j] - f * m[col][j] for j in range(n + 1)]
    return [m[i][n] for i in range(n)]
