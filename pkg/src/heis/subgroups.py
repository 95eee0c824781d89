"""Classification of linear subspaces of the Heisenberg group as subgroups
(horizontal / vertical / inclined), isotropy, group span, and deterministic
enumeration of rational directions for the expansiveness scanner.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

from gmpy2 import mpq

from . import linalg
from .group import GroupElement, omega
from .linalg import Vector, vec


class Ambient(Enum):
    R2D = "R2D"      # subspace of the horizontal plane R^{2D}
    R2D1 = "R2D1"    # subspace of the full group coordinates R^{2D+1}


class SubspaceSpec:
    """A linear subspace with a canonical reduced rational basis.

    Equality of subspaces is equality of the canonical bases, which makes
    deduplication deterministic.
    """

    __slots__ = ("ambient", "basis", "ndim")

    def __init__(self, basis: Sequence[Sequence], ambient: Ambient = Ambient.R2D,
                 ndim: Optional[int] = None):
        rows = [vec(b) for b in basis]
        if rows:
            n = len(rows[0])
        else:
            if ndim is None:
                raise ValueError("empty basis needs an explicit ambient dimension")
            n = ndim
        if any(len(r) != n for r in rows):
            raise ValueError("basis vectors have mixed lengths")
        if ambient is Ambient.R2D and n % 2:
            raise ValueError("R2D ambient needs even length vectors")
        if ambient is Ambient.R2D1 and n % 2 == 0:
            raise ValueError("R2D1 ambient needs odd length vectors")
        self.ambient = ambient
        self.basis: Tuple[Vector, ...] = tuple(linalg.rref(rows))
        self.ndim = n

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, v: Sequence) -> bool:
        return linalg.in_rowspan(vec(v), self.basis)

    def project(self, v: Sequence) -> Vector:
        return linalg.project_onto(vec(v), self.basis)

    def __eq__(self, other) -> bool:
        return (isinstance(other, SubspaceSpec) and self.ambient == other.ambient
                and self.ndim == other.ndim and self.basis == other.basis)

    def __hash__(self):
        return hash((self.ambient, self.ndim, self.basis))

    def __repr__(self):
        return "SubspaceSpec(%s, dim=%d)" % ([list(map(str, b)) for b in self.basis], self.dim)


def horizontal_part(s: SubspaceSpec) -> SubspaceSpec:
    """Image of a subspace of R^{2D+1} under the projection dropping u."""
    if s.ambient is not Ambient.R2D1:
        raise ValueError("expected a subspace of R^{2D+1}")
    return SubspaceSpec([b[:-1] for b in s.basis], Ambient.R2D, ndim=s.ndim - 1)


def is_isotropic(v_spec: SubspaceSpec) -> bool:
    """True iff the symplectic form vanishes on the subspace (checked on
    basis pairs, which suffices by bilinearity)."""
    if v_spec.ambient is not Ambient.R2D:
        raise ValueError("isotropy is a property of subspaces of R^{2D}")
    b = v_spec.basis
    for i in range(len(b)):
        for j in range(i + 1, len(b)):
            if omega(b[i], b[j]) != 0:
                return False
    return True


class SubgroupTag(Enum):
    HORIZONTAL = "Horizontal"
    VERTICAL = "Vertical"
    INCLINED = "Inclined"
    NOT_A_SUBGROUP = "NotASubgroup"


@dataclass(frozen=True)
class SubgroupClass:
    tag: SubgroupTag
    V: SubspaceSpec                      # projection onto the horizontal plane
    subspace: Optional[SubspaceSpec] = None
    witness: Optional[Tuple[GroupElement, GroupElement]] = None  # closure failure

    def is_normal(self) -> bool:
        if self.tag is SubgroupTag.NOT_A_SUBGROUP:
            raise ValueError("not a subgroup")
        return self.tag is SubgroupTag.VERTICAL

    def is_homogeneous(self) -> bool:
        if self.tag is SubgroupTag.NOT_A_SUBGROUP:
            raise ValueError("not a subgroup")
        return self.tag in (SubgroupTag.HORIZONTAL, SubgroupTag.VERTICAL)


class VerticalGroup:
    """The subgroup V x R for a rational linear V in R^{2D}."""

    __slots__ = ("V", "d")

    def __init__(self, V: SubspaceSpec):
        if V.ambient is not Ambient.R2D:
            raise ValueError("a vertical group is V x R with V in R^{2D}")
        self.V = V
        self.d = V.ndim // 2

    @property
    def dim(self) -> int:
        # dimension as a subgroup of the (2D+1)-dimensional group
        return self.V.dim + 1

    def contains(self, g: GroupElement) -> bool:
        return self.V.contains(g.v)

    def dist_sq(self, v: Sequence) -> mpq:
        """Exact squared Euclidean distance of a horizontal vector to V."""
        p = self.V.project(v)
        return linalg.norm_sq(linalg.sub(vec(v), p))

    def proj_sq(self, v: Sequence) -> mpq:
        return linalg.norm_sq(self.V.project(v))

    def __eq__(self, other):
        return isinstance(other, VerticalGroup) and self.V == other.V

    def __hash__(self):
        return hash(("vertical", self.V))

    def __repr__(self):
        return "VerticalGroup(%r)" % (self.V,)


def vertical_group(basis: Sequence[Sequence], d: int = 1) -> VerticalGroup:
    return VerticalGroup(SubspaceSpec(basis, Ambient.R2D, ndim=2 * d))


def vertical_axis(d: int = 1) -> VerticalGroup:
    return VerticalGroup(SubspaceSpec([], Ambient.R2D, ndim=2 * d))


def _axis_direction(n: int) -> Vector:
    return vec([0] * (n - 1) + [1])


def classify_subspace(s: SubspaceSpec) -> SubgroupClass:
    """Trichotomy for linear subspaces of R^{2D+1}: vertical when the u-axis
    direction is contained; else horizontal (inside u = 0, isotropic
    projection); else inclined (isotropic projection); else not a subgroup,
    with an explicit product witness leaving the subspace."""
    if s.ambient is not Ambient.R2D1:
        raise ValueError("classification expects a subspace of R^{2D+1}")
    V = horizontal_part(s)
    axis = _axis_direction(s.ndim)
    if s.contains(axis):
        return SubgroupClass(SubgroupTag.VERTICAL, V, subspace=s)
    inside_plane = all(b[-1] == 0 for b in s.basis)
    if is_isotropic(V):
        if inside_plane:
            return SubgroupClass(SubgroupTag.HORIZONTAL, V, subspace=s)
        return SubgroupClass(SubgroupTag.INCLINED, V, subspace=s)
    # non-isotropic projection without the axis: closure fails; find a basis
    # pair whose product leaves the subspace
    for i in range(len(s.basis)):
        for j in range(len(s.basis)):
            if i == j:
                continue
            g = GroupElement(s.basis[i][:-1], s.basis[i][-1])
            h = GroupElement(s.basis[j][:-1], s.basis[j][-1])
            prod = g * h
            if not s.contains(tuple(prod.v) + (prod.u,)):
                return SubgroupClass(SubgroupTag.NOT_A_SUBGROUP, V, subspace=s,
                                     witness=(g, h))
    raise AssertionError("non-isotropic subspace without closure witness")


def lin_of_elements(gens: Sequence[GroupElement]) -> SubspaceSpec:
    if not gens:
        raise ValueError("need at least one generator")
    n = len(gens[0].v) + 1
    return SubspaceSpec([tuple(g.v) + (g.u,) for g in gens], Ambient.R2D1, ndim=n)


def group_span(gens: Sequence[GroupElement]) -> SubgroupClass:
    """The smallest closed connected subgroup containing the generators.

    If two generators have a nonvanishing symplectic pairing, the span picks
    up the whole center and is the vertical group over the projected linear
    hull; otherwise the linear hull itself is already a subgroup.
    """
    if not gens:
        raise ValueError("need at least one generator")
    n2 = len(gens[0].v)
    for g, h in itertools.combinations(gens, 2):
        if omega(g.v, h.v) != 0:
            V = SubspaceSpec([g.v for g in gens], Ambient.R2D, ndim=n2)
            full = SubspaceSpec([b + (mpq(0),) for b in V.basis]
                                + [_axis_direction(n2 + 1)], Ambient.R2D1, ndim=n2 + 1)
            return SubgroupClass(SubgroupTag.VERTICAL, V, subspace=full)
    return classify_subspace(lin_of_elements(gens))


def is_normal(s: SubgroupClass) -> bool:
    return s.is_normal()


def is_homogeneous(s: SubgroupClass) -> bool:
    return s.is_homogeneous()


def rational_directions(k: int, height: int, d: int = 1) -> List[VerticalGroup]:
    """All k-dimensional subspaces of R^{2D} spanned by integer vectors with
    coordinates bounded by `height`, deduplicated, in deterministic order,
    wrapped as vertical groups."""
    n = 2 * d
    if not 0 <= k <= n - 1:
        raise ValueError("k must satisfy 0 <= k <= 2D-1, got %d" % k)
    if k == 0:
        return [vertical_axis(d)] if height >= 0 else []
    if height <= 0:
        return []
    coords = range(-height, height + 1)
    vectors = [v for v in itertools.product(coords, repeat=n) if any(v)]
    seen = {}
    for combo in itertools.combinations(vectors, k):
        spec = SubspaceSpec(combo, Ambient.R2D, ndim=n)
        if spec.dim != k or spec in seen:
            continue
        seen[spec] = VerticalGroup(spec)
    key = lambda item: tuple(tuple((c.numerator, c.denominator) for c in row)
                             for row in item[0].basis)
    return [vg for _, vg in sorted(seen.items(), key=key)]
