"""Small exact rational linear algebra kernel (row reduction, solving,
orthogonal projection).  Vectors are tuples of gmpy2.mpq; everything is
exact, no pivoting heuristics needed at these sizes.
"""

from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

from gmpy2 import mpq

from .scalars import rat

Vector = Tuple[mpq, ...]


def vec(xs: Sequence) -> Vector:
    return tuple(rat(x) for x in xs)


def dot(a: Sequence, b: Sequence):
    return sum((x * y for x, y in zip(a, b)), mpq(0))


def scale(a: Sequence, s) -> Vector:
    return tuple(x * s for x in a)


def sub(a: Sequence, b: Sequence) -> Vector:
    return tuple(x - y for x, y in zip(a, b))


def add(a: Sequence, b: Sequence) -> Vector:
    return tuple(x + y for x, y in zip(a, b))


def is_zero(a: Sequence) -> bool:
    return all(x == 0 for x in a)


def rref(rows: Sequence[Sequence]) -> List[Vector]:
    """Reduced row echelon form; zero rows dropped, pivots normalized to 1."""
    mat = [list(vec(r)) for r in rows]
    if not mat:
        return []
    ncols = len(mat[0])
    out: List[List[mpq]] = []
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, len(mat)):
            if mat[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        inv = 1 / mat[r][c]
        mat[r] = [x * inv for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[r])]
        r += 1
        if r == len(mat):
            break
    return [tuple(row) for row in mat[:r] if not all(x == 0 for x in row)]


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows))


def in_rowspan(v: Sequence, basis_rref: Sequence[Vector]) -> bool:
    """Membership of v in the span of an rref basis (exact reduction)."""
    w = list(vec(v))
    for row in basis_rref:
        p = next(i for i, x in enumerate(row) if x != 0)
        if w[p] != 0:
            f = w[p]
            w = [a - f * b for a, b in zip(w, row)]
    return all(x == 0 for x in w)


def solve_coords(v: Sequence, basis: Sequence[Sequence]) -> Optional[Vector]:
    """Coefficients c with sum(c_i * basis_i) == v, or None if v is outside
    the span.  The basis need not be orthogonal but must be independent."""
    basis = [vec(b) for b in basis]
    v = vec(v)
    if not basis:
        return () if is_zero(v) else None
    n = len(v)
    m = len(basis)
    # solve the n x m system by elimination on the augmented transpose
    aug = [[basis[j][i] for j in range(m)] + [v[i]] for i in range(n)]
    red = rref(aug)
    coeffs: List[mpq] = [mpq(0)] * m
    for row in red:
        p = next(i for i, x in enumerate(row) if x != 0)
        if p == m:
            return None  # inconsistent
        # row may still involve later free columns only when basis is
        # dependent, which construction forbids; pivot value is the coord
        coeffs[p] = row[m]
    return tuple(coeffs)


def gram_matrix(basis: Sequence[Sequence]) -> List[List[mpq]]:
    basis = [vec(b) for b in basis]
    return [[dot(a, b) for b in basis] for a in basis]


def solve_linear(mat: Sequence[Sequence], rhs: Sequence) -> Optional[Vector]:
    """Solve mat @ x = rhs for square exact mat (None if singular/inconsistent)."""
    m = len(mat)
    aug = [list(vec(mat[i])) + [rat(rhs[i])] for i in range(m)]
    red = rref(aug)
    xs: List[mpq] = [mpq(0)] * m
    for row in red:
        p = next(i for i, x in enumerate(row) if x != 0)
        if p == m:
            return None
        xs[p] = row[m]
    return tuple(xs)


def project_onto(v: Sequence, basis: Sequence[Sequence]) -> Vector:
    """Orthogonal projection of v onto span(basis), exact."""
    basis = [vec(b) for b in basis]
    v = vec(v)
    if not basis:
        return tuple(mpq(0) for _ in v)
    g = gram_matrix(basis)
    rhs = [dot(b, v) for b in basis]
    coeffs = solve_linear(g, rhs)
    if coeffs is None:
        raise ValueError("basis is linearly dependent")
    out = [mpq(0)] * len(v)
    for c, b in zip(coeffs, basis):
        out = [o + c * x for o, x in zip(out, b)]
    return tuple(out)


def norm_sq(v: Sequence):
    return dot(v, v)
