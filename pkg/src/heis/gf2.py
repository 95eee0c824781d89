"""GF(2) linear algebra on integer bitmask rows.

Rows are Python ints; bit i is column i.  The workhorse is a forward
echelon keyed by pivot (lowest set bit), which keeps insertion and
membership tests proportional to the bits actually touched; kernels are
recovered by back-substitution.
"""

from __future__ import annotations

from typing import Dict, Iterable, List, Sequence


class Echelon:
    """Incremental row echelon basis of a GF(2) row space."""

    __slots__ = ("pivrows",)

    def __init__(self, rows: Iterable[int] = ()):
        self.pivrows: Dict[int, int] = {}
        for r in rows:
            self.add(r)

    def add(self, row: int) -> bool:
        """Insert a row; True if it enlarged the span."""
        piv = self.pivrows
        while row:
            p = (row & -row).bit_length() - 1
            r = piv.get(p)
            if r is None:
                piv[p] = row
                return True
            row ^= r
        return False

    def reduce(self, vec: int) -> int:
        piv = self.pivrows
        out = 0
        v = vec
        while v:
            p = (v & -v).bit_length() - 1
            r = piv.get(p)
            if r is None:
                # this bit cannot be eliminated; rows never reintroduce
                # bits below their pivot, so it is settled
                out |= 1 << p
                v &= v - 1
            else:
                v ^= r
        return out

    def contains(self, vec: int) -> bool:
        return self.reduce(vec) == 0

    def copy(self) -> "Echelon":
        out = Echelon()
        out.pivrows = dict(self.pivrows)
        return out

    @property
    def rank(self) -> int:
        return len(self.pivrows)

    def pivots(self) -> List[int]:
        return sorted(self.pivrows)

    def kernel_basis(self, ncols: int) -> List[int]:
        """Basis of {x : r . x == 0 (mod 2) for all rows r}."""
        pivs = sorted(self.pivrows)
        pivset = set(pivs)
        basis = []
        for f in range(ncols):
            if f in pivset:
                continue
            v = 1 << f
            for p in reversed(pivs):
                if p > f:
                    continue
                # x_p must cancel the row's parity over the coordinates
                # above p, which are all decided by now
                if (self.pivrows[p] & v).bit_count() % 2:
                    v |= 1 << p
            basis.append(v)
        return basis

    def kernel_vector_with(self, ncols: int, i: int) -> int:
        """Some kernel vector whose bit i is set, or 0 if none exists
        (i.e. e_i lies in the row space)."""
        pivs = sorted(self.pivrows)
        pivset = set(pivs)
        frees = [f for f in range(ncols - 1, -1, -1) if f not in pivset]
        if i not in pivset:
            frees.remove(i)
            frees.insert(0, i)   # its own basis vector carries bit i
        for f in frees:
            v = 1 << f
            for p in reversed(pivs):
                if p > f:
                    continue
                if (self.pivrows[p] & v).bit_count() % 2:
                    v |= 1 << p
            if (v >> i) & 1:
                return v
        return 0


def echelon(rows: Iterable[int]) -> Echelon:
    return Echelon(rows)


def rank(rows: Iterable[int]) -> int:
    return Echelon(rows).rank


def kernel_basis(rows: Iterable[int], ncols: int) -> List[int]:
    return Echelon(rows).kernel_basis(ncols)
