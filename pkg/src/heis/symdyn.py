"""Subshifts of finite type over the discrete Heisenberg group.

A system is a finite alphabet plus translation-invariant local constraints.
The shift convention is (g.x)(h) = x(h g); a constraint with support
{s_1..s_k} applies at every translate g through the cells s_i g, which is
the pairing that keeps constraints shift-invariant in a noncommutative
group.

Two backends: Generic (explicit allowed tuples, exhaustive search) and
Linear2 (binary alphabet, parity constraints, exact GF(2) elimination).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from . import gf2
from .group import LatticeElement, from_normal_coords, lattice_identity, normal_form

GENERIC_CELL_CAP = 16
LINEAR2_CELL_CAP = 4096


class CapExceeded(RuntimeError):
    pass


class SystemKind(Enum):
    GENERIC = "generic"
    LINEAR2 = "linear2"


@dataclass(frozen=True)
class LocalConstraint:
    """Support cells plus a rule: an allowed-tuples set (Generic) or the
    parity rule sum == 0 mod 2 over the support (Linear2, allowed=None)."""
    support: Tuple[LatticeElement, ...]
    allowed: Optional[frozenset] = None

    def __post_init__(self):
        if len(set(self.support)) != len(self.support):
            raise ValueError("constraint support cells must be distinct")
        if not any(s.is_identity() for s in self.support):
            raise ValueError("constraint support must contain the identity")


@dataclass(frozen=True)
class SubshiftSystem:
    d: int
    alphabet: Tuple[str, ...]
    constraints: Tuple[LocalConstraint, ...]
    kind: SystemKind
    name: str = "system"

    def __post_init__(self):
        if len(self.alphabet) < 1:
            raise ValueError("alphabet must be nonempty")
        if self.kind is SystemKind.LINEAR2:
            if tuple(self.alphabet) != ("0", "1"):
                raise ValueError("Linear2 systems use the alphabet ('0', '1')")
            if any(c.allowed is not None for c in self.constraints):
                raise ValueError("Linear2 constraints are parity rules only")

    def symbol_index(self, sym: str) -> int:
        return self.alphabet.index(sym)


class Pattern:
    """A finite partial configuration: map from lattice cells to symbols."""

    __slots__ = ("values",)

    def __init__(self, values: Dict[LatticeElement, str]):
        self.values = dict(values)

    @property
    def domain(self):
        return self.values.keys()

    def __getitem__(self, cell: LatticeElement) -> str:
        return self.values[cell]

    def __len__(self):
        return len(self.values)

    def __eq__(self, other):
        return isinstance(other, Pattern) and self.values == other.values

    def __hash__(self):
        return hash(frozenset(self.values.items()))

    def restrict(self, cells: Iterable[LatticeElement]) -> "Pattern":
        return Pattern({c: self.values[c] for c in cells})

    def __repr__(self):
        items = sorted(self.values.items(), key=lambda kv: kv[0])
        return "Pattern({%s})" % ", ".join("%r: %r" % kv for kv in items)


def shift_act(g: LatticeElement, x: Pattern) -> Pattern:
    """(g.x)(h) = x(h g); the domain moves to {d g^{-1} : d in dom x}."""
    ginv = g.inv()
    return Pattern({cell * ginv: sym for cell, sym in x.values.items()})


@dataclass(frozen=True)
class WindowBox:
    """A finite box in normal-form coordinates (a_1..a_D, b_1..b_D, c):
    inclusive (lo, hi) ranges, one per coordinate."""
    ranges: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        if len(self.ranges) % 2 == 0:
            raise ValueError("need 2D+1 coordinate ranges")
        for lo, hi in self.ranges:
            if lo > hi:
                raise ValueError("empty range (%d, %d)" % (lo, hi))

    @property
    def d(self) -> int:
        return len(self.ranges) // 2

    def size(self) -> int:
        n = 1
        for lo, hi in self.ranges:
            n *= hi - lo + 1
        return n

    def cells(self) -> List[LatticeElement]:
        d = self.d
        axes = [range(lo, hi + 1) for lo, hi in self.ranges]
        out = []
        for coords in itertools.product(*axes):
            out.append(from_normal_coords(coords[:d], coords[d:2 * d], coords[2 * d]))
        return out

    def contains(self, g: LatticeElement) -> bool:
        nf = normal_form(g)
        coords = nf.a + nf.b + (nf.c,)
        return all(lo <= x <= hi for (lo, hi), x in zip(self.ranges, coords))


def window_box(a, b, c) -> WindowBox:
    """Convenience constructor for D = 1 boxes from (lo, hi) pairs."""
    return WindowBox((tuple(a), tuple(b), tuple(c)))


def centered_box(size_a: int, size_b: int, size_c: int) -> WindowBox:
    """D = 1 box of the given extents, centered at the identity."""
    def rng(n):
        return (-(n // 2), n - n // 2 - 1)
    return WindowBox((rng(size_a), rng(size_b), rng(size_c)))


def _window_cells(window) -> List[LatticeElement]:
    if isinstance(window, WindowBox):
        return window.cells()
    return list(window)


def constraint_instances(system: SubshiftSystem,
                         cells: Sequence[LatticeElement]):
    """All fully contained constraint instances on a cell set.

    Yields (constraint, instance_cells) with instance_cells[i] = support[i] g
    for the translate g; only instances whose cells all lie in the set are
    produced (partially covered instances are ignored: open-world local
    admissibility)."""
    cell_set = set(cells)
    for g in cells:
        for con in system.constraints:
            inst = tuple(s * g for s in con.support)
            if all(c in cell_set for c in inst):
                yield con, inst


def locally_admissible(x: Pattern, system: SubshiftSystem) -> bool:
    for con, inst in constraint_instances(system, list(x.domain)):
        syms = tuple(x[c] for c in inst)
        if con.allowed is not None:
            if syms not in con.allowed:
                return False
        else:
            if sum(system.symbol_index(s) for s in syms) % 2:
                return False
    return True


def admissible_patterns(window, system: SubshiftSystem,
                        cap: int = GENERIC_CELL_CAP) -> Iterator[Pattern]:
    """Depth-first enumeration of all locally admissible total patterns on
    the window, deterministic order (cells sorted, alphabet order)."""
    cells = sorted(_window_cells(window))
    if len(cells) > cap:
        raise CapExceeded("window has %d cells, cap is %d" % (len(cells), cap))
    index = {c: i for i, c in enumerate(cells)}
    instances = []
    for con, inst in constraint_instances(system, cells):
        idxs = tuple(index[c] for c in inst)
        instances.append((max(idxs), idxs, con))
    # check each instance as soon as its last cell is assigned
    by_last: List[List[Tuple[Tuple[int, ...], LocalConstraint]]] = [[] for _ in cells]
    for last, idxs, con in instances:
        by_last[last].append((idxs, con))

    n = len(cells)
    assignment: List[Optional[str]] = [None] * n

    def ok(pos: int) -> bool:
        for idxs, con in by_last[pos]:
            syms = tuple(assignment[i] for i in idxs)
            if con.allowed is not None:
                if syms not in con.allowed:
                    return False
            else:
                if sum(system.symbol_index(s) for s in syms) % 2:
                    return False
        return True

    def rec(pos: int) -> Iterator[Pattern]:
        if pos == n:
            yield Pattern({cells[i]: assignment[i] for i in range(n)})
            return
        for sym in system.alphabet:
            assignment[pos] = sym
            if ok(pos):
                yield from rec(pos + 1)
        assignment[pos] = None

    yield from rec(0)


@dataclass(frozen=True)
class LinearSolutionSpace:
    """GF(2) description of all admissible patterns on a window: one column
    per cell, one row per fully contained constraint instance."""
    cells: Tuple[LatticeElement, ...]
    rows: Tuple[int, ...]
    echelon: gf2.Echelon

    @property
    def rank(self) -> int:
        return self.echelon.rank

    @property
    def kernel_dim(self) -> int:
        return len(self.cells) - self.rank

    def pattern_count(self) -> int:
        return 1 << self.kernel_dim

    def kernel(self) -> List[int]:
        return self.echelon.kernel_basis(len(self.cells))

    def to_pattern(self, bits: int) -> Pattern:
        return Pattern({c: "1" if (bits >> i) & 1 else "0"
                        for i, c in enumerate(self.cells)})


def constraint_rows(system: SubshiftSystem,
                    cells: Sequence[LatticeElement]) -> List[int]:
    index = {c: i for i, c in enumerate(cells)}
    rows = []
    for _, inst in constraint_instances(system, cells):
        row = 0
        for c in inst:
            row |= 1 << index[c]
        rows.append(row)
    return rows


def solution_space(window, system: SubshiftSystem,
                   cap: int = LINEAR2_CELL_CAP) -> LinearSolutionSpace:
    if system.kind is not SystemKind.LINEAR2:
        raise ValueError("solution_space needs a Linear2 system")
    cells = sorted(_window_cells(window))
    if len(cells) > cap:
        raise CapExceeded("window has %d cells, cap is %d" % (len(cells), cap))
    rows = constraint_rows(system, cells)
    return LinearSolutionSpace(tuple(cells), tuple(rows), gf2.Echelon(rows))


# ---------------------------------------------------------------------------
# Built-in systems.

def full_shift(alphabet: Sequence[str] = ("0", "1"), d: int = 1) -> SubshiftSystem:
    # the binary full shift is a (vacuous) parity system; larger alphabets
    # need the generic backend
    kind = SystemKind.LINEAR2 if tuple(alphabet) == ("0", "1") else SystemKind.GENERIC
    return SubshiftSystem(d, tuple(alphabet), (), kind, name="full_shift")


def fixed_point(d: int = 1) -> SubshiftSystem:
    return SubshiftSystem(d, ("0",), (), SystemKind.GENERIC, name="fixed_point")


def three_dot(d: int = 1) -> SubshiftSystem:
    """Binary parity system on the support {identity, x1, y1}."""
    sup = (lattice_identity(d),
           from_normal_coords((1,) + (0,) * (d - 1), (0,) * d, 0),
           from_normal_coords((0,) * d, (1,) + (0,) * (d - 1), 0))
    return SubshiftSystem(d, ("0", "1"), (LocalConstraint(sup),),
                          SystemKind.LINEAR2, name="three_dot")


def determined_direction(d: int = 1) -> SubshiftSystem:
    """Alias of three_dot documenting the reading x(x1 g) = x(g) + x(y1 g):
    the parity rule propagates values along the x1 direction."""
    sys = three_dot(d)
    return SubshiftSystem(sys.d, sys.alphabet, sys.constraints, sys.kind,
                          name="determined_direction")


BUILTIN_SYSTEMS = {
    "full_shift": full_shift,
    "fixed_point": fixed_point,
    "three_dot": three_dot,
    "determined_direction": determined_direction,
}


# ---------------------------------------------------------------------------
# JSON system format.

def system_to_json(system: SubshiftSystem) -> dict:
    cons = []
    for c in system.constraints:
        rec = {"support": [list(s.v) + [s.u2] for s in c.support]}
        if c.allowed is not None:
            rec["allowed"] = sorted(list(t) for t in c.allowed)
        cons.append(rec)
    return {"D": system.d, "alphabet": list(system.alphabet),
            "kind": system.kind.value, "constraints": cons, "name": system.name}


def system_from_json(data: dict) -> SubshiftSystem:
    d = int(data["D"])
    alphabet = tuple(str(s) for s in data["alphabet"])
    kind = SystemKind(data.get("kind", "generic"))
    cons = []
    for rec in data.get("constraints", []):
        support = tuple(LatticeElement(entry[:-1], entry[-1])
                        for entry in rec["support"])
        allowed = None
        if "allowed" in rec:
            allowed = frozenset(tuple(str(s) for s in t) for t in rec["allowed"])
        elif kind is SystemKind.GENERIC:
            raise ValueError("generic constraints must list their allowed tuples")
        cons.append(LocalConstraint(support, allowed))
    return SubshiftSystem(d, alphabet, tuple(cons), kind,
                          name=str(data.get("name", "system")))


def load_system(path: str) -> SubshiftSystem:
    with open(path) as fh:
        return system_from_json(json.load(fh))
