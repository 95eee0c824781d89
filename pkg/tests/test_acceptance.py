"""Acceptance suite: one test per criterion, each prints a pass line and
asserts its wall-clock budget."""

import itertools
import json
import random
import subprocess
import sys
import time

import numpy as np
import pytest
from gmpy2 import mpq

from heis import coding, geometry, group, subgroups, symdyn
from heis.coding import Budget
from heis.group import (GroupElement, LatticeElement, lattice_x, lattice_y,
                        lattice_z)
from heis.subgroups import (Ambient, SubgroupTag, SubspaceSpec,
                            classify_subspace, group_span, vertical_axis,
                            vertical_group)
from heis.symdyn import centered_box, fixed_point, full_shift, three_dot


def report(n, name, elapsed, budget):
    print("criterion %2d (%s): PASS in %.2fs (budget %ds)"
          % (n, name, elapsed, budget))
    assert elapsed < budget


def rand_group(rng, d=1):
    v = tuple(mpq(rng.randrange(-99, 100), rng.randrange(1, 9))
              for _ in range(2 * d))
    return GroupElement(v, mpq(rng.randrange(-99, 100), rng.randrange(1, 9)))


def rand_lattice(rng, d=1):
    v = tuple(rng.randrange(-9, 10) for _ in range(2 * d))
    u2 = 2 * rng.randrange(-9, 10) + (sum(v[i] * v[d + i]
                                          for i in range(d)) & 1)
    return LatticeElement(v, u2)


def test_criterion_01_algebra():
    t0 = time.monotonic()
    rng = random.Random(101)
    pool = [rand_group(rng) for _ in range(500)]
    for i in range(100_000):
        g, h, k = (pool[(i * a + b) % 500] for a, b in
                   ((1, 0), (7, 1), (13, 2)))
        assert (g * h) * k == g * (h * k)
    for i in range(100_000):
        g = pool[i % 500]
        n = i % 13 - 6
        assert g ** n == GroupElement(tuple(n * c for c in g.v), n * g.u)
    for i in range(100_000):
        g, h = pool[i % 500], pool[(i * 3 + 1) % 500]
        w = group.omega(g.v, h.v)
        assert g * h == (h * g) * GroupElement((mpq(0), mpq(0)), w)
    lat = [rand_lattice(rng) for _ in range(500)]
    for i in range(100_000):
        g, h = lat[i % 500], lat[(i * 3 + 1) % 500]
        prod = g * h
        assert prod.u2 % 2 == sum(prod.v[i] * prod.v[1 + i]
                                  for i in range(1)) % 2
        assert prod.to_group() == g.to_group() * h.to_group()
    report(1, "algebra", time.monotonic() - t0, 10)


def test_criterion_02_word_identities():
    t0 = time.monotonic()
    x, y, z = lattice_x(), lattice_y(), lattice_z()
    assert x * y == z * (y * x)
    for K in range(7):
        assert y ** K * x ** K == x ** K * y ** K * z ** (-K * K)
        for k in range(K + 1):
            for l in range(K + 1):
                lhs = y ** k * x ** l * y ** (K - k) * x ** (K - l)
                assert lhs == y ** K * x ** K * z ** (l * (K - k))
    report(2, "word identities", time.monotonic() - t0, 1)


def test_criterion_03_norm_metric():
    t0 = time.monotonic()
    rng = random.Random(303)
    for _ in range(2000):
        g = rand_group(rng)
        r = mpq(rng.randrange(1, 50), rng.randrange(1, 9))
        assert geometry.ck_gauge4(geometry.dilate(r, g)) == \
            r ** 4 * geometry.ck_gauge4(g)
        assert geometry.ck_gauge4(g.inv()) == geometry.ck_gauge4(g)
        assert (geometry.ck_gauge4(g) == 0) == g.is_identity()
    for _ in range(10_000):
        g, h = rand_group(rng), rand_group(rng)
        assert geometry.ck_norm(g * h) <= \
            geometry.ck_norm(g) + geometry.ck_norm(h) + 1e-9
        k = rand_group(rng)
        assert geometry.ck_dist4(g * k, h * k) == geometry.ck_dist4(g, h)
    report(3, "norm and metric", time.monotonic() - t0, 10)


def _sampled_dist_to_vertical(g, G, d):
    """Numerical minimization of the gauge distance from g to V x R."""
    from scipy.optimize import minimize
    basis = [[float(c) for c in b] for b in G.V.basis] if G.dim else []
    k = len(basis)

    def f(params):
        w = [0.0] * (2 * d)
        for c, b in zip(params[:k], basis):
            for i in range(2 * d):
                w[i] += c * b[i]
        h = GroupElement(tuple(mpq(c) for c in w), mpq(float(params[k])))
        return float(geometry.ck_dist4(g, h))

    best = None
    rng = random.Random(7)
    starts = [[0.0] * (k + 1)] + \
        [[rng.uniform(-3, 3) for _ in range(k + 1)] for _ in range(3)]
    for s in starts:
        res = minimize(f, s, method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-14,
                                "maxiter": 4000})
        if best is None or res.fun < best:
            best = res.fun
    return best ** 0.25


def test_criterion_04_dist_to_vertical_oracle():
    t0 = time.monotonic()
    rng = random.Random(404)
    for d in (1, 2):
        for _ in range(50):
            g = rand_group(rng, d)
            dim = rng.randrange(0, 2 * d)
            vecs = [tuple(rng.randrange(-3, 4) for _ in range(2 * d))
                    for _ in range(dim)]
            vecs = [v for v in vecs if any(v)]
            G = vertical_group(vecs, d) if vecs else vertical_axis(d)
            closed = geometry.dist_to_vertical(g, G)
            sampled = _sampled_dist_to_vertical(g, G, d)
            assert sampled >= closed - 1e-9
            assert abs(sampled - closed) <= 1e-6
    report(4, "vertical distance oracle", time.monotonic() - t0, 30)


def test_criterion_05_set_algebra():
    t0 = time.monotonic()
    # block products: I_n^t . I_m == I_{n+m}^t for whole-block indices n >= 1
    # (at n = 0 the t = 2 slab contains odd-parity columns whose half-integer
    # centers cannot be recentred inside a zero-width block)
    for t in (mpq(1), mpq(2)):
        for n in range(1, 5):
            for m in range(0, 5):
                iv_n = geometry.interval_set(n, t, 1)
                iv_nm = geometry.interval_set(n + m, t, 1)
                assert geometry.interval_product(iv_n, m) == set(iv_nm.elements)
    # slab membership ignores the central coordinate
    rng = random.Random(505)
    axis_like = [vertical_axis(1), vertical_group([(1, 2)], 1)]
    for _ in range(1000):
        G = rng.choice(axis_like)
        slab = geometry.ThickenedSlab(G, mpq(rng.randrange(1, 4)),
                                      r=mpq(rng.randrange(1, 5)))
        v = tuple(mpq(rng.randrange(-9, 10), rng.randrange(1, 4))
                  for _ in range(2))
        u1 = mpq(rng.randrange(-99, 100), rng.randrange(1, 9))
        u2 = mpq(rng.randrange(-99, 100), rng.randrange(1, 9))
        m = geometry.slab_member(GroupElement(v, mpq(0)), slab)
        assert geometry.slab_member(GroupElement(v, u1), slab) == m
        assert geometry.slab_member(GroupElement(v, u2), slab) == m
    # Minkowski decomposition of slab projections, both inclusions exact
    for _ in range(1000):
        G = rng.choice(axis_like)
        t1, t2 = mpq(rng.randrange(1, 4)), mpq(rng.randrange(1, 4))
        r1, r2 = mpq(rng.randrange(1, 4)), mpq(rng.randrange(1, 4))

        def member(v, t, r):
            return G.dist_sq(v) <= t * t and G.proj_sq(v) <= r * r

        def shrink(v, t, r):
            # exact rescaling of the V / V-perp parts into the (t, r) box
            p = tuple(G.V.project(v))
            q = tuple(a - b for a, b in zip(v, p))
            sp = r * r / (r * r + G.proj_sq(v)) if G.dim else mpq(0)
            sq = t * t / (t * t + G.dist_sq(v))
            return tuple(sp * a + sq * b for a, b in zip(p, q))

        w1 = tuple(mpq(rng.randrange(-9, 10), rng.randrange(1, 4))
                   for _ in range(2))
        w2 = tuple(mpq(rng.randrange(-9, 10), rng.randrange(1, 4))
                   for _ in range(2))
        v1, v2 = shrink(w1, t1, r1), shrink(w2, t2, r2)
        assert member(v1, t1, r1) and member(v2, t2, r2)
        assert member(tuple(a + b for a, b in zip(v1, v2)), t1 + t2, r1 + r2)
        # reverse: proportional split of a point of the large box
        v = shrink(w1, t1 + t2, r1 + r2)
        p = tuple(G.V.project(v))
        q = tuple(a - b for a, b in zip(v, p))
        a1 = tuple(r1 / (r1 + r2) * a + t1 / (t1 + t2) * b
                   for a, b in zip(p, q))
        a2 = tuple(a - b for a, b in zip(v, a1))
        assert member(a1, t1, r1) and member(a2, t2, r2)
    report(5, "set algebra", time.monotonic() - t0, 30)


def test_criterion_06_lambda_bound():
    t0 = time.monotonic()
    lam = geometry.lambda_bound(1)
    assert lam.value <= 2 ** -0.25 + 1e-9
    b4 = geometry.lambda_gauge4_bound(1)
    # grid search over the covering domain at spacing 1/64: every point is
    # within gauge distance lambda of some lattice point
    worst = mpq(0)
    for i in range(-32, 33):
        for j in range(-32, 33):
            for k in range(0, 33):
                g = GroupElement((mpq(i, 64), mpq(j, 64)), mpq(k, 64))
                d4 = geometry.ck_dist4(g, geometry.lattice_approximate(g))
                if d4 > worst:
                    worst = d4
    assert worst <= b4
    assert float(worst) ** 0.25 <= lam.value + 1e-9
    report(6, "lambda bound", time.monotonic() - t0, 60)


def test_criterion_07_classification():
    t0 = time.monotonic()
    axis = classify_subspace(SubspaceSpec([(0, 0, 1)], Ambient.R2D1, 3))
    assert axis.tag is SubgroupTag.VERTICAL
    plane = classify_subspace(
        SubspaceSpec([(1, 0, 0), (0, 1, 0)], Ambient.R2D1, 3))
    assert plane.tag is SubgroupTag.NOT_A_SUBGROUP
    inclined = classify_subspace(SubspaceSpec([(1, 0, 1)], Ambient.R2D1, 3))
    assert inclined.tag is SubgroupTag.INCLINED
    full = group_span([lattice_x().to_group(), lattice_y().to_group()])
    assert full.tag is SubgroupTag.VERTICAL and full.subspace.dim == 3

    # exhaustive trichotomy over integer spans of height <= 2
    coords = range(-2, 3)
    vecs = [v for v in itertools.product(coords, coords, coords) if any(v)]
    seen = set()
    n_checked = 0
    for m in range(1, 3):
        for combo in itertools.combinations(vecs, m):
            s = SubspaceSpec(combo, Ambient.R2D1, 3)
            key = s.canonical_key() if hasattr(s, "canonical_key") else \
                tuple(sorted(tuple(map(str, b)) for b in s.basis))
            if key in seen:
                continue
            seen.add(key)
            cls = classify_subspace(s)
            has_axis = s.contains((0, 0, 1))
            pi = [b[:2] for b in s.basis]
            iso = all(group.omega(a, b) == 0 for a in pi for b in pi)
            in_plane = all(b[2] == 0 for b in s.basis)
            if has_axis:
                assert cls.tag is SubgroupTag.VERTICAL
            elif not iso:
                assert cls.tag is SubgroupTag.NOT_A_SUBGROUP
                g, h = cls.witness
                assert group.omega(g.v, h.v) != 0
            elif in_plane:
                assert cls.tag is SubgroupTag.HORIZONTAL
            else:
                assert cls.tag is SubgroupTag.INCLINED
            if cls.tag is not SubgroupTag.NOT_A_SUBGROUP:
                assert cls.is_normal() == (cls.tag is SubgroupTag.VERTICAL)
                assert cls.is_homogeneous() == (cls.tag in
                                                (SubgroupTag.VERTICAL,
                                                 SubgroupTag.HORIZONTAL))
            n_checked += 1
    assert n_checked > 100
    report(7, "classification", time.monotonic() - t0, 5)


def _pattern_span(space):
    """All admissible patterns of a linear window as integer bitmasks."""
    span = np.zeros(1, dtype=np.int64)
    for b in space.kernel():
        span = np.concatenate([span, span ^ np.int64(b)])
    return span


def _oracle_forced(span, amask, full_mask):
    """Cells agreeing across every fiber of patterns with equal A-values."""
    keys = span & np.int64(amask)
    order = np.argsort(keys, kind="stable")
    ks, ps = keys[order], span[order]
    new = np.empty(len(ks), dtype=bool)
    new[0] = True
    np.not_equal(ks[1:], ks[:-1], out=new[1:])
    gi = np.cumsum(new) - 1
    reps = ps[new]
    varying = int(np.bitwise_or.reduce(ps ^ reps[gi]))
    return full_mask & ~varying


def test_criterion_08_backend_equivalence():
    t0 = time.monotonic()
    system = three_dot()
    sizes = [s for s in itertools.product(range(1, 15), repeat=3)
             if s[0] * s[1] * s[2] <= 14]
    n_queries = 0
    for sa, sb, sc in sizes:
        window = centered_box(sa, sb, sc)
        cells = sorted(window.cells())
        n = len(cells)
        space = symdyn.solution_space(cells, system)
        span = _pattern_span(space)
        assert len(span) == space.pattern_count()
        full_mask = (1 << n) - 1
        for size in range(0, 5):
            for idx in itertools.combinations(range(n), size):
                amask = sum(1 << i for i in idx)
                a_cells = [cells[i] for i in idx]
                fm = coding._ForcedMap(system, cells, a_cells, "linear2",
                                       16, 4096)
                lin = sum(1 << cells.index(c) for c in fm.forced_all())
                assert lin | amask == _oracle_forced(span, amask, full_mask) \
                    | amask
                n_queries += n
    print("backend equivalence: %d queries" % n_queries)
    report(8, "backend equivalence", time.monotonic() - t0, 600)


def test_criterion_09_axis_not_certified():
    t0 = time.monotonic()
    system = three_dot()
    axis = vertical_axis(1)
    window = centered_box(12, 12, 12)
    for t in range(1, 5):
        ok, detail = coding.certify_at(axis, system, t, window)
        assert not ok, detail
    v = coding.nonexpansive_evidence(axis, system, mpq(2), 6,
                                     Budget(evidence_n=6))
    assert v.tag == coding.EVIDENCE_NONEXPANSIVE
    assert len(v.witness_chain) == 6
    p0 = v.params["p0"]
    for link in v.witness_chain:
        x, y = link["patterns"]
        assert x[p0] != y[p0]
        assert symdyn.locally_admissible(x, system)
        assert symdyn.locally_admissible(y, system)
    report(9, "axis nonexpansive shadow", time.monotonic() - t0, 300)


def test_criterion_10_direction_scan():
    t0 = time.monotonic()
    budget = Budget()
    r3 = coding.scan_directions(three_dot(), 1, 3, budget)
    assert any(row["verdict"] == coding.EVIDENCE_NONEXPANSIVE
               for row in r3.rows)
    rfull = coding.scan_directions(full_shift(), 1, 3, budget)
    assert all(row["verdict"] == coding.EVIDENCE_NONEXPANSIVE
               for row in rfull.rows)
    rfix = coding.scan_directions(fixed_point(), 1, 3, budget)
    assert all(row["verdict"] == coding.CERTIFIED for row in rfix.rows)
    report(10, "direction scan", time.monotonic() - t0, 600)


def test_criterion_11_determinism():
    t0 = time.monotonic()
    runs = [subprocess.run([sys.executable, "-m", "heis.cli", "verify",
                            "--seed", "7"], capture_output=True, text=True)
            for _ in range(2)]
    assert runs[0].returncode == 0
    assert runs[0].stdout == runs[1].stdout
    assert "payload sha256:" in runs[0].stdout
    report(11, "determinism", time.monotonic() - t0, 120)
