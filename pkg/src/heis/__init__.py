"""Exact arithmetic and homogeneous geometry for the Heisenberg group,
with a forcing engine that decides expansiveness questions for vertical
subgroups acting on subshifts of finite type."""

from .group import (DimensionMismatch, GroupElement, LatticeElement,
                    NormalForm, ParityError, eval_normal_form, format_element, format_lattice,
                    format_word, from_normal_coords, identity,
                    lattice_identity, lattice_x, lattice_y, lattice_z,
                    normal_form, omega, parse_element, parse_lattice,
                    parse_word, word_eval, x_gen, y_gen, z_gen)
from .geometry import (IntervalSet, LambdaBound, ThickenedSlab, ck_dist,
                       ck_dist4, ck_gauge4, ck_norm, central_powers, dilate,
                       dist_to_vertical, dist_to_vertical_sq, enumerate_slab,
                       interval_product, interval_set, lambda_bound,
                       lambda_upper, lattice_approximate, slab_member,
                       span_approximate)
from .subgroups import (Ambient, SubgroupClass, SubgroupTag, SubspaceSpec,
                        VerticalGroup, classify_subspace, group_span,
                        is_homogeneous, is_isotropic, is_normal,
                        rational_directions, vertical_axis, vertical_group)
from .symdyn import (BUILTIN_SYSTEMS, CapExceeded, LocalConstraint, Pattern,
                     SubshiftSystem, SystemKind, WindowBox,
                     admissible_patterns, centered_box, fixed_point,
                     full_shift, load_system, locally_admissible, shift_act,
                     solution_space, system_from_json, system_to_json,
                     three_dot, window_box)
from .coding import (Budget, CodingQuery, CodingVerdict,
                     ExpansivenessVerdict, FloatDirection, ScanReport,
                     certify_at, certify_expansive, coding_closure_check,
                     forced_cells, nonexpansive_evidence, scan_directions,
                     shell_orbit_reps, weak_code_check)

__version__ = "0.1.0"
