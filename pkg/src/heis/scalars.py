"""Exact rational scalar helpers shared by all modules.

All group and geometry arithmetic is done with gmpy2.mpq; floats appear
only in display output and in sampling oracles inside the test suite.
"""

from __future__ import annotations

from gmpy2 import mpq

QVal = mpq  # alias used in annotations

ZERO = mpq(0)
ONE = mpq(1)
HALF = mpq(1, 2)


def rat(x) -> mpq:
    """Coerce ints, strings like '3/2' and Fractions to an exact rational."""
    if isinstance(x, float):
        raise TypeError("floats are not accepted where exact rationals are required: %r" % (x,))
    return mpq(x)


def rfloor(q) -> int:
    q = mpq(q)
    return q.numerator // q.denominator


def rceil(q) -> int:
    q = mpq(q)
    return -((-q.numerator) // q.denominator)


def round_ties_toward_zero(q) -> int:
    """Nearest integer to q; on a .5 tie pick the one with smaller absolute value."""
    q = mpq(q)
    lo = rfloor(q)
    hi = lo + 1
    dlo = q - lo
    dhi = hi - q
    if dlo < dhi:
        return lo
    if dhi < dlo:
        return hi
    return lo if lo >= 0 else hi


def isqrt_ceil(q) -> int:
    """Smallest integer m >= 0 with m*m >= q (q a nonnegative rational)."""
    q = mpq(q)
    if q <= 0:
        return 0
    m = rceil(q)
    r = int(m ** 0.5)
    while r * r < q:
        r += 1
    while r >= 1 and (r - 1) * (r - 1) >= q:
        r -= 1
    return r


def parse_rat(s: str) -> mpq:
    return mpq(s.strip())


def fmt_rat(q) -> str:
    q = mpq(q)
    if q.denominator == 1:
        return str(q.numerator)
    return "%d/%d" % (q.numerator, q.denominator)
