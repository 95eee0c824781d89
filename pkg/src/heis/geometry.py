"""Homogeneous geometry: dilations, the Cygan-Koranyi gauge and metric,
distances to vertical groups, thickened slabs, interval sets, and exact
lattice enumeration.

All threshold comparisons are carried out on exact rational fourth powers
(gauge4) or squares; floating point is display-only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

from gmpy2 import mpq

from . import linalg
from .group import (DimensionMismatch, GroupElement, LatticeElement, omega)
from .scalars import isqrt_ceil, rat, rfloor, rceil, round_ties_toward_zero
from .subgroups import VerticalGroup, vertical_axis


def _as_group(g) -> GroupElement:
    return g.to_group() if isinstance(g, LatticeElement) else g


def dilate(r, g: GroupElement) -> GroupElement:
    """Anisotropic scaling (v, u) -> (r v, r^2 u), r > 0."""
    r = rat(r)
    if r <= 0:
        raise ValueError("dilation factor must be positive, got %s" % r)
    g = _as_group(g)
    return GroupElement(tuple(r * c for c in g.v), r * r * g.u)


def ck_gauge4(g) -> mpq:
    """|v|^4 + |u|^2 — the fourth power of the Cygan-Koranyi gauge, exact."""
    g = _as_group(g)
    n2 = linalg.norm_sq(g.v)
    return n2 * n2 + g.u * g.u


def ck_norm(g) -> float:
    """Display-only floating value gauge4 ** (1/4)."""
    return float(ck_gauge4(g)) ** 0.25


def ck_dist4(g, h) -> mpq:
    """Fourth power of the right-invariant distance ||g h^{-1}||, exact."""
    g = _as_group(g)
    h = _as_group(h)
    return ck_gauge4(g * h.inv())


def ck_dist(g, h) -> float:
    return float(ck_dist4(g, h)) ** 0.25


def dist_to_vertical_sq(g, G: VerticalGroup) -> mpq:
    """Exact squared Euclidean distance of the horizontal part of g to V;
    by the closed form this squares the homogeneous distance to V x R."""
    g = _as_group(g)
    return G.dist_sq(g.v)


def dist_to_vertical(g, G: VerticalGroup) -> float:
    return float(dist_to_vertical_sq(g, G)) ** 0.5


# ---------------------------------------------------------------------------
# Thickened slabs around vertical groups.

@dataclass(frozen=True)
class ThickenedSlab:
    """The set of g with d_e(pi(g), V) <= t, optionally |proj_V pi(g)| <= r
    and u inside u_box.  r=None and u_box=None mean unbounded."""
    G: VerticalGroup
    t: mpq
    r: Optional[mpq] = None
    u_box: Optional[Tuple[mpq, mpq]] = None

    def __post_init__(self):
        object.__setattr__(self, "t", rat(self.t))
        if self.t < 0:
            raise ValueError("slab width t must be >= 0")
        if self.r is not None:
            object.__setattr__(self, "r", rat(self.r))
            if self.r < 0:
                raise ValueError("slab extent r must be >= 0")
        if self.u_box is not None:
            lo, hi = self.u_box
            object.__setattr__(self, "u_box", (rat(lo), rat(hi)))


def slab_member(g, s: ThickenedSlab) -> bool:
    g = _as_group(g)
    if s.G.dist_sq(g.v) > s.t * s.t:
        return False
    if s.r is not None and s.G.proj_sq(g.v) > s.r * s.r:
        return False
    if s.u_box is not None:
        lo, hi = s.u_box
        if not (lo <= g.u <= hi):
            return False
    return True


def enumerate_slab(s: ThickenedSlab) -> List[LatticeElement]:
    """All lattice points in a bounded slab, lexicographic on (v, u2)."""
    if s.r is None or s.u_box is None:
        raise ValueError("enumeration needs finite r and a bounded u_box")
    # |v|^2 = dist^2 + proj^2 <= t^2 + r^2 bounds every coordinate
    bound = isqrt_ceil(s.t * s.t + s.r * s.r)
    n = 2 * s.G.d
    lo, hi = s.u_box
    u2_lo, u2_hi = rceil(2 * lo), rfloor(2 * hi)
    out: List[LatticeElement] = []
    for v in itertools.product(range(-bound, bound + 1), repeat=n):
        if s.G.dist_sq(v) > s.t * s.t or s.G.proj_sq(v) > s.r * s.r:
            continue
        par = sum(v[i] * v[s.G.d + i] for i in range(s.G.d)) % 2
        start = u2_lo + ((par - u2_lo) % 2)
        for u2 in range(start, u2_hi + 1, 2):
            out.append(LatticeElement(v, u2))
    out.sort()
    return out


# ---------------------------------------------------------------------------
# Interval sets I_n^t: lattice points of the t-thickened vertical axis with
# center coordinate between -n and n.

@dataclass(frozen=True)
class IntervalSet:
    t: mpq
    n: int
    elements: Tuple[LatticeElement, ...]


def interval_set(n: int, t, d: int = 1) -> IntervalSet:
    if n < 0:
        raise ValueError("n must be >= 0")
    t = rat(t)
    slab = ThickenedSlab(vertical_axis(d), t, r=t, u_box=(mpq(-n), mpq(n)))
    # for the axis, proj_V is zero, so r=t is never binding
    return IntervalSet(t, n, tuple(enumerate_slab(slab)))


def central_powers(m: int, d: int = 1) -> List[LatticeElement]:
    """I_m = {z^k : |k| <= m}."""
    return [LatticeElement((0,) * (2 * d), 2 * k) for k in range(-m, m + 1)]


def interval_product(a: IntervalSet, m: int) -> set:
    """The product set I_n^t * I_m, elementwise."""
    if m < 0:
        raise ValueError("m must be >= 0")
    d = a.elements[0].dim if a.elements else 1
    return {h * g for h in a.elements for g in central_powers(m, d)}


# ---------------------------------------------------------------------------
# Lattice approximation and the universal approximation constant.

def lattice_approximate(g: GroupElement) -> LatticeElement:
    """Nearest-ish lattice point: round v coordinatewise (ties toward zero),
    then pick the parity-admissible center coordinate minimizing the exact
    distance (ties toward zero)."""
    g = _as_group(g)
    iv = tuple(round_ties_toward_zero(c) for c in g.v)
    d = g.dim
    par = sum(iv[i] * iv[d + i] for i in range(d)) % 2
    # distance center term: u_g - u_h - omega(v_g, iv)/2 with u_h = u2/2
    target = 2 * (g.u - mpq(omega(g.v, iv)) / 2)
    base = rfloor(target)
    cands = [u2 for u2 in range(base - 2, base + 3) if u2 % 2 == par]
    best = None
    for u2 in cands:
        gap = abs(target - u2)
        key = (gap, abs(u2))
        if best is None or key < best[0]:
            best = (key, u2)
    return LatticeElement(iv, best[1])


def lambda_gauge4_bound(d: int = 1) -> mpq:
    """Exact gauge4 bound for lattice approximation: the v-rounding error is
    at most sqrt(2D)/2 per vector, the centered u gap at most 1/2, giving
    (D/2)^2 + 1/4."""
    return mpq(d, 2) ** 2 + mpq(1, 4)


def lambda_upper(d: int = 1) -> mpq:
    """A rational upper bound L with L^4 >= lambda_gauge4_bound(d); for
    D = 1 this is 27/32, slightly above 2^(-1/4)."""
    b4 = lambda_gauge4_bound(d)
    # smallest multiple of 1/64 whose fourth power clears the bound
    k = 1
    while mpq(k, 64) ** 4 < b4:
        k += 1
    return mpq(k, 64)


@dataclass(frozen=True)
class LambdaBound:
    """The approximation constant: value is the float fourth root of the
    exact gauge4 bound; rational_upper over-approximates on a 1/64 grid and
    is what the certificate arithmetic uses."""
    value: float
    gauge4: mpq
    rational_upper: mpq
    method: str


def lambda_bound(d: int = 1) -> LambdaBound:
    b4 = lambda_gauge4_bound(d)
    return LambdaBound(float(b4) ** 0.25, b4, lambda_upper(d),
                       "coordinatewise rounding: |v-round(v)|^2 <= D/2, "
                       "centered u gap <= 1/2; rational bound on a 1/64 grid")


# ---------------------------------------------------------------------------
# Approximation of span points by products of generator powers.

def span_approximate(g: GroupElement, gens: Sequence[GroupElement]):
    """An integer-power product of the generators close to g, with an exact
    gauge4 bound derived from the generator data.

    Returns (h, bound4) with ck_dist4(g, h) <= bound4.  Raises if g is
    outside the linear hull of the generators.
    """
    g = _as_group(g)
    gens = [_as_group(x) for x in gens]
    if not gens:
        raise ValueError("need at least one generator")
    gamma = corr = None
    for a, b in itertools.combinations(gens, 2):
        w = mpq(omega(a.v, b.v))
        if w != 0:
            gamma = abs(w)
            corr = a.commutator(b) if w > 0 else b.commutator(a)
            break
    # pick an independent generating subset; in the non-isotropic case the
    # span is V x R, so only the horizontal parts need to be independent
    indep: List[GroupElement] = []
    rows: List[tuple] = []
    for x in gens:
        row = tuple(x.v) if gamma is not None else tuple(x.v) + (x.u,)
        if linalg.rank(rows + [row]) > len(rows):
            indep.append(x)
            rows.append(row)
    if gamma is not None:
        coords = linalg.solve_coords(g.v, [x.v for x in indep])
    else:
        coords = linalg.solve_coords(tuple(g.v) + (g.u,),
                                     [tuple(x.v) + (x.u,) for x in indep])
    if coords is None:
        raise ValueError("element lies outside the span of the generators")
    ks = [round_ties_toward_zero(c) for c in coords]
    m = len(indep)
    max_v_sq = max(linalg.norm_sq(x.v) for x in indep)
    max_u = max(abs(x.u) for x in indep)
    c1_sq = mpq(m, 2) ** 2 * max_v_sq    # (m/2 * max|v_i|)^2
    c2 = mpq(m, 2) * max_u
    h = indep[0].pow(ks[0])
    for k, x in zip(ks[1:], indep[1:]):
        h = h * x.pow(k)
    if gamma is None:
        bound4 = c1_sq * c1_sq + c2 * c2
    else:
        # cancel the collected center defect with central commutator powers
        defect = g.u - h.u - mpq(omega(g.v, h.v)) / 2
        l = round_ties_toward_zero(defect / gamma)
        h = h * corr.pow(l)
        bound4 = c1_sq * c1_sq + (c2 + gamma) ** 2
    return h, bound4
