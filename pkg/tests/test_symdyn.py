import json
import random

import pytest

from heis.group import (LatticeElement, from_normal_coords, lattice_identity,
                        lattice_x, lattice_y, lattice_z)
from heis.symdyn import (CapExceeded, LocalConstraint, Pattern,
                         SubshiftSystem, SystemKind, WindowBox,
                         admissible_patterns, centered_box,
                         constraint_instances, fixed_point, full_shift,
                         load_system, locally_admissible, shift_act,
                         solution_space, system_from_json, system_to_json,
                         three_dot, window_box)


def test_builtin_kinds():
    assert three_dot().kind is SystemKind.LINEAR2
    assert full_shift().kind is SystemKind.LINEAR2
    assert full_shift(("a", "b", "c")).kind is SystemKind.GENERIC
    assert len(fixed_point().alphabet) == 1


def test_window_boxes():
    box = centered_box(2, 2, 2)
    assert box.size() == 8 and len(box.cells()) == 8
    assert all(box.contains(c) for c in box.cells())
    big = window_box((-1, 1), (-1, 1), (-1, 1))
    assert big.size() == 27


def test_pattern_restrict_and_shift():
    x1, y1 = lattice_x(), lattice_y()
    p = Pattern({lattice_identity(): "1", x1: "0"})
    assert p.restrict([x1]).values == {x1: "0"}
    q = shift_act(x1, p)
    assert q[lattice_identity()] == "0"


def test_shift_action_is_action():
    rng = random.Random(31)
    cells = centered_box(2, 2, 2).cells()
    p = Pattern({c: rng.choice("01") for c in cells})
    g = from_normal_coords((1,), (2,), 0)
    h = from_normal_coords((-1,), (1,), 1)
    assert shift_act(h, shift_act(g, p)).values == \
        shift_act(h * g, p).values


def test_three_dot_invariance_under_shift():
    # admissibility of a pattern is invariant under recentering the window
    sys3 = three_dot()
    box = centered_box(2, 2, 1)
    pats = list(admissible_patterns(box, sys3))
    g = from_normal_coords((1,), (0,), 0)
    for p in pats[:16]:
        assert locally_admissible(shift_act(g.inv(), p), sys3)


def test_three_dot_pattern_counts():
    sys3 = three_dot()
    box = centered_box(2, 2, 1)
    pats = list(admissible_patterns(box, sys3))
    sol = solution_space(box, sys3)
    assert len(pats) == sol.pattern_count()
    assert len(pats) == 2 ** sol.kernel_dim


def test_full_shift_counts():
    box = centered_box(2, 2, 1)
    assert len(list(admissible_patterns(box, full_shift()))) == 16
    assert len(list(admissible_patterns(box, fixed_point()))) == 1


def test_constraint_instances_open_world():
    sys3 = three_dot()
    box = centered_box(3, 3, 3)
    for con, inst in constraint_instances(sys3, box.cells()):
        assert len(inst) == len(con.support)
        for c in inst:
            assert box.contains(c)


def test_generic_cap():
    with pytest.raises(CapExceeded):
        list(admissible_patterns(centered_box(5, 5, 5),
                                 full_shift(("a", "b", "c")), cap=16))


def test_linear2_requires_binary():
    with pytest.raises(ValueError):
        SubshiftSystem(1, ("a", "b", "c"), (), SystemKind.LINEAR2)


def test_json_roundtrip(tmp_path):
    for system in (three_dot(), full_shift(), fixed_point()):
        blob = system_to_json(system)
        json.dumps(blob)
        assert system_from_json(blob) == system
    path = tmp_path / "sys.json"
    path.write_text(json.dumps(system_to_json(three_dot())))
    assert load_system(str(path)) == three_dot()


def test_json_generic_needs_allowed():
    blob = system_to_json(three_dot())
    blob["kind"] = "generic"
    with pytest.raises(ValueError):
        system_from_json(blob)


def test_solution_space_rank():
    sys3 = three_dot()
    box = centered_box(2, 2, 1)
    sol = solution_space(box, sys3)
    assert sol.rank + sol.kernel_dim == len(sol.cells)
    for bits in sol.kernel():
        pat = sol.to_pattern(bits)
        assert locally_admissible(pat, sys3)
