"""Exact arithmetic in the continuous and discrete Heisenberg groups.

Elements of the continuous group are pairs (v, u) with v a 2D-vector of
exact rationals and u an exact rational; the product is
(v, u)(w, s) = (v + w, u + s + omega(v, w)/2) with omega the standard
symplectic form pairing e_i with f_i.

Lattice elements carry integer v and a doubled center coordinate u2 = 2u,
subject to the parity constraint u2 == sum(p_i q_i) (mod 2); this is
exactly the membership condition of the discrete group generated by the
x_i, y_i.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

from gmpy2 import mpq

from .scalars import rat


class DimensionMismatch(ValueError):
    pass


class ParityError(ValueError):
    pass


def omega(v: Sequence, w: Sequence):
    """Standard symplectic form: sum of p_i*q'_i - q_i*p'_i."""
    if len(v) != len(w) or len(v) % 2:
        raise DimensionMismatch("vectors must have equal even length, got %d and %d"
                                % (len(v), len(w)))
    d = len(v) // 2
    acc = 0
    for i in range(d):
        acc += v[i] * w[d + i] - v[d + i] * w[i]
    return acc


class GroupElement:
    """A point (v, u) of the continuous Heisenberg group, exact rational."""

    __slots__ = ("v", "u")

    def __init__(self, v: Iterable, u):
        self.v = tuple(rat(c) for c in v)
        self.u = rat(u)
        if len(self.v) % 2:
            raise DimensionMismatch("v must have even length, got %d" % len(self.v))

    @property
    def dim(self) -> int:
        return len(self.v) // 2

    def mul(self, other: "GroupElement") -> "GroupElement":
        if len(self.v) != len(other.v):
            raise DimensionMismatch("cannot multiply elements of different dimension")
        w = omega(self.v, other.v)
        return GroupElement(tuple(a + b for a, b in zip(self.v, other.v)),
                            self.u + other.u + mpq(w) / 2)

    __mul__ = mul

    def inv(self) -> "GroupElement":
        return GroupElement(tuple(-c for c in self.v), -self.u)

    def pow(self, n: int) -> "GroupElement":
        # closed form: (v, u)^n = (nv, nu)
        return GroupElement(tuple(n * c for c in self.v), n * self.u)

    def __pow__(self, n: int) -> "GroupElement":
        return self.pow(n)

    def commutator(self, other: "GroupElement") -> "GroupElement":
        w = omega(self.v, other.v)
        return GroupElement((0,) * len(self.v), w)

    def is_identity(self) -> bool:
        return self.u == 0 and all(c == 0 for c in self.v)

    def __eq__(self, other) -> bool:
        return (isinstance(other, GroupElement)
                and self.v == other.v and self.u == other.u)

    def __hash__(self):
        return hash((self.v, self.u))

    def __repr__(self):
        return "GroupElement(%s, %s)" % (list(self.v), self.u)

    def to_lattice(self) -> "LatticeElement":
        iv = []
        for c in self.v:
            if c.denominator != 1:
                raise ParityError("not a lattice point: non-integer v coordinate %s" % c)
            iv.append(int(c.numerator))
        u2q = 2 * self.u
        if u2q.denominator != 1:
            raise ParityError("not a lattice point: u not a half-integer: %s" % self.u)
        return LatticeElement(tuple(iv), int(u2q.numerator))


def identity(d: int = 1) -> GroupElement:
    return GroupElement((0,) * (2 * d), 0)


def x_gen(i: int = 1, d: int = 1) -> GroupElement:
    v = [0] * (2 * d)
    v[i - 1] = 1
    return GroupElement(v, 0)


def y_gen(i: int = 1, d: int = 1) -> GroupElement:
    v = [0] * (2 * d)
    v[d + i - 1] = 1
    return GroupElement(v, 0)


def z_gen(d: int = 1) -> GroupElement:
    return GroupElement((0,) * (2 * d), 1)


class LatticeElement:
    """A point of the discrete Heisenberg group: integer v, doubled center u2."""

    __slots__ = ("v", "u2")

    def __init__(self, v: Iterable[int], u2: int, check: bool = True):
        self.v = tuple(int(c) for c in v)
        self.u2 = int(u2)
        if len(self.v) % 2:
            raise DimensionMismatch("v must have even length")
        if check and not self.parity_ok():
            raise ParityError("u2=%d violates the center parity for v=%s"
                              % (self.u2, list(self.v)))

    @property
    def dim(self) -> int:
        return len(self.v) // 2

    def parity_ok(self) -> bool:
        d = len(self.v) // 2
        s = sum(self.v[i] * self.v[d + i] for i in range(d))
        return (self.u2 - s) % 2 == 0

    def mul(self, other: "LatticeElement") -> "LatticeElement":
        if len(self.v) != len(other.v):
            raise DimensionMismatch("cannot multiply elements of different dimension")
        w = omega(self.v, other.v)
        return LatticeElement(tuple(a + b for a, b in zip(self.v, other.v)),
                              self.u2 + other.u2 + w, check=False)

    __mul__ = mul

    def inv(self) -> "LatticeElement":
        return LatticeElement(tuple(-c for c in self.v), -self.u2, check=False)

    def pow(self, n: int) -> "LatticeElement":
        return LatticeElement(tuple(n * c for c in self.v), n * self.u2, check=False)

    __pow__ = pow

    def is_identity(self) -> bool:
        return self.u2 == 0 and all(c == 0 for c in self.v)

    def to_group(self) -> GroupElement:
        return GroupElement(self.v, mpq(self.u2, 2))

    @property
    def u(self):
        return mpq(self.u2, 2)

    def __eq__(self, other) -> bool:
        return (isinstance(other, LatticeElement)
                and self.v == other.v and self.u2 == other.u2)

    def __hash__(self):
        return hash((self.v, self.u2))

    def __lt__(self, other: "LatticeElement") -> bool:
        return (self.v, self.u2) < (other.v, other.u2)

    def __repr__(self):
        return "LatticeElement(%s, u2=%d)" % (list(self.v), self.u2)


def lattice_identity(d: int = 1) -> LatticeElement:
    return LatticeElement((0,) * (2 * d), 0)


def lattice_x(i: int = 1, d: int = 1) -> LatticeElement:
    v = [0] * (2 * d)
    v[i - 1] = 1
    return LatticeElement(v, 0)


def lattice_y(i: int = 1, d: int = 1) -> LatticeElement:
    v = [0] * (2 * d)
    v[d + i - 1] = 1
    return LatticeElement(v, 0)


def lattice_z(d: int = 1) -> LatticeElement:
    return LatticeElement((0,) * (2 * d), 2)


# ---------------------------------------------------------------------------
# Words over the generators x_1..x_D, y_1..y_D, z.

Word = Tuple[Tuple[str, int], ...]


def parse_word(text: str) -> Word:
    """Parse a word like "x1 y1^-1 z^2" into ((gen, exp), ...) pairs."""
    out = []
    for tok in text.split():
        if "^" in tok:
            gen, _, e = tok.partition("^")
            exp = int(e)
        else:
            gen, exp = tok, 1
        if gen in ("x", "y"):       # shorthand for the first pair
            gen += "1"
        if not (gen == "z" or (gen[0] in "xy" and gen[1:].isdigit() and int(gen[1:]) >= 1)):
            raise ValueError("bad generator %r in word %r" % (gen, text))
        out.append((gen, exp))
    return tuple(out)


def format_word(w: Word) -> str:
    return " ".join(g if e == 1 else "%s^%d" % (g, e) for g, e in w)


def _generator(gen: str, d: int) -> LatticeElement:
    if gen == "z":
        return lattice_z(d)
    if gen in ("x", "y"):
        gen += "1"
    i = int(gen[1:])
    if i > d:
        raise DimensionMismatch("generator %s needs D >= %d" % (gen, i))
    return lattice_x(i, d) if gen[0] == "x" else lattice_y(i, d)


def word_eval(w, d: int = 1) -> LatticeElement:
    """Evaluate a word (or its string form) left to right in the lattice."""
    if isinstance(w, str):
        w = parse_word(w)
    acc = lattice_identity(d)
    for gen, exp in w:
        acc = acc * _generator(gen, d).pow(exp)
    return acc


# ---------------------------------------------------------------------------
# Normal form: g = x_1^{a_1}..x_D^{a_D} y_1^{b_1}..y_D^{b_D} z^c.

@dataclass(frozen=True)
class NormalForm:
    a: Tuple[int, ...]
    b: Tuple[int, ...]
    c: int


def normal_form(g: LatticeElement) -> NormalForm:
    if not g.parity_ok():
        raise ParityError("input violates the lattice parity invariant")
    d = g.dim
    a = g.v[:d]
    b = g.v[d:]
    s = sum(a[i] * b[i] for i in range(d))
    # u = sum(a_i b_i)/2 + c, exactly; parity makes c an integer
    c = (g.u2 - s) // 2
    return NormalForm(a, b, c)


def eval_normal_form(nf: NormalForm) -> LatticeElement:
    d = len(nf.a)
    s = sum(nf.a[i] * nf.b[i] for i in range(d))
    return LatticeElement(nf.a + nf.b, s + 2 * nf.c)


def from_normal_coords(a: Sequence[int], b: Sequence[int], c: int) -> LatticeElement:
    return eval_normal_form(NormalForm(tuple(a), tuple(b), int(c)))


# ---------------------------------------------------------------------------
# Textual element syntax: "[p1,...,pD,q1,...,qD|u2]".  For lattice elements
# the entries are integers; the same syntax with rational entries (and u2 a
# rational equal to 2u) denotes a continuous element.

def parse_lattice(text: str) -> LatticeElement:
    v, u2 = _split_brackets(text)
    return LatticeElement(tuple(int(c) for c in v), int(u2))


def parse_element(text: str) -> GroupElement:
    """[v...|u2] (lattice-style, center twice the u coordinate) or
    (v...|u) (continuous, center given directly)."""
    t = text.strip()
    if t.startswith("(") and t.endswith(")"):
        body = t[1:-1]
        vpart, bar, upart = body.partition("|")
        if not bar:
            raise ValueError("expected element syntax (p,...,q,...|u), got %r"
                             % text)
        coords = [c.strip() for c in vpart.split(",") if c.strip()]
        return GroupElement(tuple(rat(c) for c in coords), rat(upart.strip()))
    v, u2 = _split_brackets(text)
    return GroupElement(tuple(rat(c) for c in v), rat(u2) / 2)


def _split_brackets(text: str):
    t = text.strip()
    if not (t.startswith("[") and t.endswith("]")) or "|" not in t:
        raise ValueError("expected element syntax [p,...,q,...|u2], got %r" % text)
    body = t[1:-1]
    vpart, _, upart = body.partition("|")
    coords = [c.strip() for c in vpart.split(",") if c.strip()]
    return coords, upart.strip()


def format_lattice(g: LatticeElement) -> str:
    return "[%s|%d]" % (",".join(str(c) for c in g.v), g.u2)


def format_element(g: GroupElement) -> str:
    return "(%s|%s)" % (",".join(str(c) for c in g.v), g.u)
