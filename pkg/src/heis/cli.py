"""Command-line front end: element arithmetic and geometry queries,
subgroup classification, subshift tooling, the expansiveness engine, and a
deterministic verification harness.

Exit codes: 0 success, 1 verdict-level failure (a check that ran but did
not pass), 2 usage or input errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys
from dataclasses import dataclass, fields

from gmpy2 import mpq

from . import coding, geometry, group, subgroups, symdyn
from .coding import Budget
from .scalars import rat
from .subgroups import Ambient, SubspaceSpec


@dataclass
class RunConfig:
    D: int = 1
    generic_cap: int = symdyn.GENERIC_CELL_CAP
    linear2_cap: int = symdyn.LINEAR2_CELL_CAP
    t_max: int = 2
    evidence_t: str = "2"
    evidence_n: int = 4
    window: tuple = (11, 11, 9)
    workers: int = 0          # 0: take HEIS_THREADS, default 1
    seed: int = 0
    out: str = ""

    def budget(self) -> Budget:
        return Budget(t_max=self.t_max, window=tuple(self.window),
                      evidence_t=rat(self.evidence_t),
                      evidence_n=self.evidence_n,
                      generic_cap=self.generic_cap,
                      linear2_cap=self.linear2_cap)

    def validate(self):
        for name in ("generic_cap", "linear2_cap", "t_max", "evidence_n"):
            if getattr(self, name) <= 0:
                raise ValueError("config field %s must be positive" % name)
        if self.D <= 0:
            raise ValueError("config field D must be positive")
        if len(self.window) != 3 or any(w <= 0 for w in self.window):
            raise ValueError("config window must be three positive extents")


class CliError(Exception):
    """Input-level error: reported on stderr, exit code 2."""


def _emit(obj, out_path: str = ""):
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)


def _load_config(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, ValueError) as exc:
            raise CliError("config: %s" % exc)
        names = {f.name for f in fields(RunConfig)}
        for key, val in data.items():
            if key not in names:
                raise CliError("config: unknown field %r" % key)
            setattr(cfg, key, tuple(val) if key == "window" else val)
    for name in ("D", "t_max", "evidence_n", "seed", "workers", "out"):
        val = getattr(args, name.lower(), None)
        if val is not None:
            setattr(cfg, name, val)
    win = getattr(args, "window", None)
    if isinstance(win, tuple):    # box extents; string windows are per-command
        cfg.window = win
    try:
        cfg.validate()
    except ValueError as exc:
        raise CliError(str(exc))
    if cfg.workers == 0:
        try:
            cfg.workers = max(1, int(os.environ.get("HEIS_THREADS", "1")))
        except ValueError:
            cfg.workers = 1
    return cfg


def _parse_element(text: str):
    try:
        return group.parse_element(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise CliError("element %r: %s" % (text, exc))


def _parse_vectors(texts, d: int):
    """Semicolon- or flag-separated vectors with rational entries."""
    vecs = []
    for t in texts:
        for part in t.split(";"):
            part = part.strip()
            if not part:
                continue
            try:
                vecs.append(tuple(rat(c) for c in part.split(",")))
            except (ValueError, ZeroDivisionError) as exc:
                raise CliError("vector %r: %s" % (part, exc))
    for v in vecs:
        if len(v) not in (2 * d, 2 * d + 1):
            raise CliError("vector length %d does not match D=%d" % (len(v), d))
    return vecs


def _load_json(path: str):
    # a literal JSON value is accepted in place of a file name
    if path.lstrip().startswith(("[", "{")):
        try:
            return json.loads(path)
        except ValueError as exc:
            raise CliError("inline JSON: %s" % exc)
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, ValueError) as exc:
        raise CliError("%s: %s" % (path, exc))


def _load_sys(path: str) -> symdyn.SubshiftSystem:
    try:
        return symdyn.system_from_json(_load_json(path))
    except (KeyError, ValueError, TypeError) as exc:
        raise CliError("system %s: %s" % (path, exc))


def _load_cells(path: str):
    data = _load_json(path)
    if not isinstance(data, list):
        raise CliError("%s: expected a JSON list of [v..., u2] cells" % path)
    out = []
    for i, entry in enumerate(data):
        try:
            out.append(group.LatticeElement(entry[:-1], entry[-1]))
        except (ValueError, TypeError, IndexError) as exc:
            raise CliError("%s[%d]: %s" % (path, i, exc))
    return out


def _window_from_arg(text: str) -> symdyn.WindowBox:
    try:
        sizes = tuple(int(c) for c in text.split(","))
        if len(sizes) != 3:
            raise ValueError("need three extents a,b,c")
        return symdyn.centered_box(*sizes)
    except ValueError as exc:
        raise CliError("window %r: %s" % (text, exc))


def _vertical_from_arg(texts, d: int) -> subgroups.VerticalGroup:
    vecs = [v for v in _parse_vectors(texts, d) if any(v)]
    for v in vecs:
        if len(v) != 2 * d:
            raise CliError("direction vectors live in R^{2D}; got length %d"
                           % len(v))
    if not vecs:
        return subgroups.vertical_axis(d)
    return subgroups.VerticalGroup(SubspaceSpec(vecs, Ambient.R2D, 2 * d))


# ---------------------------------------------------------------------------
# Subcommands.

def cmd_norm(args, cfg: RunConfig) -> int:
    g = _parse_element(args.element)
    _emit({"element": args.element, "gauge4": str(geometry.ck_gauge4(g)),
           "norm": geometry.ck_norm(g)}, cfg.out)
    return 0


def cmd_dist(args, cfg: RunConfig) -> int:
    g = _parse_element(args.g)
    if args.V is not None:
        vg = _vertical_from_arg([args.V], g.dim)
        _emit({"g": args.g, "V": args.V,
               "dist_sq": str(geometry.dist_to_vertical_sq(g, vg)),
               "dist": geometry.dist_to_vertical(g, vg)}, cfg.out)
        return 0
    if args.h is None:
        raise CliError("dist needs either a second element or --V")
    h = _parse_element(args.h)
    _emit({"g": args.g, "h": args.h,
           "dist4": str(geometry.ck_dist4(g, h)),
           "dist": geometry.ck_dist(g, h)}, cfg.out)
    return 0


def cmd_classify(args, cfg: RunConfig) -> int:
    if args.elements:
        gens = [_parse_element(t) for t in args.elements]
        cls = subgroups.group_span(gens)
    else:
        if not args.basis:
            raise CliError("classify needs --basis vectors or --elements")
        vecs = _parse_vectors(args.basis, cfg.D)
        n = 2 * cfg.D + 1
        vecs = [v if len(v) == n else v + (rat(0),) for v in vecs]
        cls = subgroups.classify_subspace(SubspaceSpec(vecs, Ambient.R2D1, n))
    out = {"class": cls.tag.value}
    if cls.tag is not subgroups.SubgroupTag.NOT_A_SUBGROUP:
        out["normal"] = cls.is_normal()
        out["homogeneous"] = cls.is_homogeneous()
    if cls.witness is not None:
        out["witness"] = [group.format_element(w) for w in cls.witness]
    _emit(out, cfg.out)
    return 0


def cmd_enum(args, cfg: RunConfig) -> int:
    try:
        if args.n is not None:
            iv = geometry.interval_set(args.n, rat(args.t), cfg.D)
            cells = list(iv.elements)
            head = {"kind": "interval_set", "n": args.n, "t": args.t}
        else:
            vg = _vertical_from_arg([args.V] if args.V else [], cfg.D)
            u = rat(args.u)
            slab = geometry.ThickenedSlab(vg, rat(args.t), r=rat(args.r),
                                          u_box=(-u, u))
            cells = geometry.enumerate_slab(slab)
            head = {"kind": "slab", "V": args.V or "0", "t": args.t,
                    "r": args.r, "u": args.u}
    except (ValueError, ZeroDivisionError) as exc:
        raise CliError(str(exc))
    head["count"] = len(cells)
    head["cells"] = [list(c.v) + [c.u2] for c in cells]
    _emit(head, cfg.out)
    return 0


def cmd_approx(args, cfg: RunConfig) -> int:
    g = _parse_element(args.element)
    h = geometry.lattice_approximate(g)
    _emit({"element": args.element,
           "lattice": list(h.v) + [h.u2],
           "dist4": str(geometry.ck_dist4(g, h.to_group())),
           "dist": geometry.ck_dist(g, h.to_group()),
           "lambda_upper": str(geometry.lambda_upper(g.dim))}, cfg.out)
    return 0


def cmd_sys(args, cfg: RunConfig) -> int:
    system = _load_sys(args.sys) if args.sys else _builtin(args.builtin)
    if args.action == "validate":
        _emit({"name": system.name, "D": system.d,
               "alphabet": list(system.alphabet),
               "kind": system.kind.value,
               "n_constraints": len(system.constraints),
               "valid": True}, cfg.out)
        return 0
    window = _window_from_arg(args.window)
    try:
        pats = list(symdyn.admissible_patterns(window, system,
                                               cap=cfg.generic_cap))
    except symdyn.CapExceeded as exc:
        raise CliError(str(exc))
    out = {"name": system.name, "window": [list(r) for r in window.ranges],
           "count": len(pats)}
    if args.list:
        out["patterns"] = [sorted([list(c.v) + [c.u2], s]
                                  for c, s in p.values.items()) for p in pats]
    _emit(out, cfg.out)
    return 0


def _builtin(name: str) -> symdyn.SubshiftSystem:
    if name not in symdyn.BUILTIN_SYSTEMS:
        raise CliError("unknown builtin system %r (have: %s)"
                       % (name, ", ".join(sorted(symdyn.BUILTIN_SYSTEMS))))
    return symdyn.BUILTIN_SYSTEMS[name]()


def _system_arg(args) -> symdyn.SubshiftSystem:
    if getattr(args, "sys", None):
        return _load_sys(args.sys)
    if getattr(args, "builtin", None):
        return _builtin(args.builtin)
    raise CliError("need --sys file.json or --builtin name")


def cmd_code(args, cfg: RunConfig) -> int:
    system = _system_arg(args)
    A = frozenset(_load_cells(args.A))
    B = frozenset(_load_cells(args.B))
    window = _window_from_arg(args.window)
    try:
        q = coding.CodingQuery(system, A, B, window)
        verdict = coding.weak_code_check(q, backend=args.backend,
                                         generic_cap=cfg.generic_cap,
                                         linear2_cap=cfg.linear2_cap)
    except (ValueError, symdyn.CapExceeded) as exc:
        raise CliError(str(exc))
    out = {"tag": verdict.tag}
    if verdict.witness is not None:
        x, y, b = verdict.witness
        out["witness"] = {"cell": list(b.v) + [b.u2],
                          "patterns": [coding._jsonable(x),
                                       coding._jsonable(y)]}
    _emit(out, cfg.out)
    return 0 if verdict.forces else 1


def cmd_expansive(args, cfg: RunConfig) -> int:
    system = _system_arg(args)
    vg = _vertical_from_arg([args.V] if args.V else [], system.d)
    budget = cfg.budget()
    if args.evidence_only:
        verdict = coding.nonexpansive_evidence(vg, system, budget.evidence_t,
                                               budget.evidence_n, budget)
    else:
        verdict = coding.certify_expansive(vg, system, budget)
    _emit(verdict.to_json(), cfg.out)
    return 0 if verdict.tag != coding.UNKNOWN else 1


def cmd_scan(args, cfg: RunConfig) -> int:
    system = _system_arg(args)
    report = coding.scan_directions(system, args.k, args.height,
                                    cfg.budget(), workers=cfg.workers)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(report.to_csv())
    _emit(report.to_json() if args.full else
          {"summary": coding._jsonable(report.summary)})
    return 0


# ---------------------------------------------------------------------------
# Verification harness.

def _verify_suite(seed: int):
    """Deterministic property suite; returns (rows, payload).  The payload
    contains everything hashed for reproducibility — no wall times."""
    rng = random.Random(seed)
    rows = []
    payload = {"seed": seed}

    def check(name, ok, detail=None):
        rows.append((name, bool(ok)))
        payload[name] = {"pass": bool(ok), "detail": detail}

    # group law on random exact elements
    def rand_elem(d=1):
        v = tuple(mpq(rng.randrange(-99, 100), rng.randrange(1, 9))
                  for _ in range(2 * d))
        return group.GroupElement(v, mpq(rng.randrange(-99, 100),
                                         rng.randrange(1, 9)))

    ok = True
    for _ in range(500):
        g, h, k = rand_elem(), rand_elem(), rand_elem()
        n = rng.randrange(-6, 7)
        if (g * h) * k != g * (h * k):
            ok = False
        if g ** n != group.GroupElement(tuple(n * c for c in g.v), n * g.u):
            ok = False
        w = group.omega(g.v, h.v)
        if g * h != (h * g) * group.GroupElement((0, 0), mpq(w)):
            ok = False
    check("group_law", ok, "500 exact random triples")

    nf_ok = True
    for _ in range(200):
        g = group.LatticeElement((rng.randrange(-9, 10), rng.randrange(-9, 10)),
                                 0, check=False)
        g = group.LatticeElement(g.v, g.v[0] * g.v[1] + 2 * rng.randrange(-9, 10))
        if group.eval_normal_form(group.normal_form(g)) != g:
            nf_ok = False
    check("normal_form_roundtrip", nf_ok, "200 lattice elements")

    tri_ok = True
    for _ in range(300):
        g, h = rand_elem(), rand_elem()
        if geometry.ck_norm(g * h) > geometry.ck_norm(g) + geometry.ck_norm(h) + 1e-9:
            tri_ok = False
    check("gauge_triangle", tri_ok, "300 random pairs, tol 1e-9")

    lam = geometry.lambda_bound(1)
    check("lambda_upper", float(lam.value) <= 2 ** -0.25 + 1e-9,
          str(lam.value))

    iv = geometry.interval_set(1, rat(1), 1)
    prod = geometry.interval_product(iv, 1)
    iv2 = geometry.interval_set(2, rat(1), 1)
    check("interval_product", prod == set(iv2.elements),
          "I_1^1 * I_1 == I_2^1 (%d cells)" % len(iv2.elements))

    cls = subgroups.group_span([group.x_gen(), group.y_gen()])
    check("span_xy_vertical",
          cls.tag is subgroups.SubgroupTag.VERTICAL and cls.V.dim == 2,
          cls.tag.value)

    sys3 = symdyn.three_dot()
    box = symdyn.centered_box(2, 2, 2)
    agree = True
    cells = sorted(box.cells())
    for _ in range(20):
        a = frozenset(rng.sample(cells, rng.randrange(0, 4)))
        b = frozenset([rng.choice(cells)])
        q = coding.CodingQuery(sys3, a, b, box)
        v1 = coding.weak_code_check(q, backend="linear2").tag
        v2 = coding.weak_code_check(q, backend="generic").tag
        if v1 != v2:
            agree = False
    check("backend_agreement", agree, "20 random queries on a 2x2x2 box")

    axis = subgroups.vertical_axis(1)
    ev = coding.nonexpansive_evidence(axis, sys3, rat(2), 2,
                                      Budget(evidence_n=2))
    check("axis_evidence", ev.tag == coding.EVIDENCE_NONEXPANSIVE,
          coding._jsonable(ev.params.get("p0")))

    rep = coding.scan_directions(symdyn.fixed_point(), 1, 2,
                                 Budget(t_max=1, window=(7, 7, 5)))
    check("fixed_point_scan",
          rep.summary["counts"][coding.CERTIFIED] == rep.summary["n_directions"],
          rep.summary["counts"])
    payload["scan_payload"] = rep.payload_json()
    return rows, payload


def cmd_verify(args, cfg: RunConfig) -> int:
    rows, payload = _verify_suite(cfg.seed)
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    digest = hashlib.sha256(blob.encode()).hexdigest()
    width = max(len(n) for n, _ in rows)
    for name, ok in rows:
        sys.stdout.write("%-*s  %s\n" % (width, name, "PASS" if ok else "FAIL"))
    n_fail = sum(1 for _, ok in rows if not ok)
    sys.stdout.write("payload sha256: %s\n" % digest)
    sys.stdout.write("%d checks, %d failures\n" % (len(rows), n_fail))
    if cfg.out:
        with open(cfg.out, "w") as fh:
            json.dump({"payload": payload, "sha256": digest}, fh,
                      sort_keys=True, indent=2)
            fh.write("\n")
    return 1 if n_fail else 0


# ---------------------------------------------------------------------------
# Argument parsing.

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig fields")
    common.add_argument("--seed", type=int, help="seed for sampled checks")
    common.add_argument("--out", help="also write the main output to this file")
    common.add_argument("-D", type=int, dest="d", help="ambient dimension D")
    p = argparse.ArgumentParser(
        prog="heis", parents=[common],
        description="Exact Heisenberg-group geometry and expansiveness "
                    "tooling for subshifts of finite type.")
    sub = p.add_subparsers(dest="command", required=True)
    sub_kw = {"parents": [common]}

    q = sub.add_parser("norm", **sub_kw, help="Cygan-Koranyi gauge of an element")
    q.add_argument("element", help='element text, e.g. "[0,0|2]" or "(1/2,0|1/4)"')
    q.set_defaults(func=cmd_norm)

    q = sub.add_parser("dist", **sub_kw, help="distance between elements or to V x R")
    q.add_argument("g")
    q.add_argument("h", nargs="?")
    q.add_argument("--V", help="comma/semicolon vectors spanning V")
    q.set_defaults(func=cmd_dist)

    q = sub.add_parser("classify", **sub_kw, help="classify a subspace or generated span")
    q.add_argument("--basis", action="append",
                   help="basis vector(s) in R^{2D} or R^{2D+1}; repeatable, "
                        "';'-separated")
    q.add_argument("--elements", nargs="*",
                   help="group elements whose span to classify")
    q.set_defaults(func=cmd_classify)

    q = sub.add_parser("enum", **sub_kw, help="enumerate slab or interval lattice sets")
    q.add_argument("--t", required=True, help="slab width (rational)")
    q.add_argument("--n", type=int, help="interval-set height bound -> I_n^t")
    q.add_argument("--r", default="4", help="horizontal extent for slabs")
    q.add_argument("--u", default="4", help="center bound |u| <= u for slabs")
    q.add_argument("--V", help="direction vectors for slab enumeration")
    q.set_defaults(func=cmd_enum)

    q = sub.add_parser("approx", **sub_kw, help="nearest lattice point, gauge distance")
    q.add_argument("element")
    q.set_defaults(func=cmd_approx)

    q = sub.add_parser("sys", **sub_kw, help="validate a system or enumerate patterns")
    q.add_argument("action", choices=["validate", "patterns"])
    q.add_argument("--sys", help="system JSON file")
    q.add_argument("--builtin", help="builtin system name")
    q.add_argument("--window", default="2,2,2", help="box extents a,b,c")
    q.add_argument("--list", action="store_true", help="list the patterns")
    q.set_defaults(func=cmd_sys)

    q = sub.add_parser("code", **sub_kw, help="weak-coding check A -> B on a window")
    q.add_argument("--sys")
    q.add_argument("--builtin")
    q.add_argument("--A", required=True, help="JSON list of [v...,u2] cells")
    q.add_argument("--B", required=True)
    q.add_argument("--window", required=True, help="box extents a,b,c")
    q.add_argument("--backend", default="auto",
                   choices=["auto", "linear2", "generic"])
    q.set_defaults(func=cmd_code)

    q = sub.add_parser("expansive", **sub_kw, help="certify or gather evidence for V")
    q.add_argument("--sys")
    q.add_argument("--builtin")
    q.add_argument("--V", help="direction vectors; omit for the axis")
    q.add_argument("--tmax", type=int, dest="t_max")
    q.add_argument("--evidence-n", type=int, dest="evidence_n")
    q.add_argument("--evidence-only", action="store_true")
    q.add_argument("--window", type=lambda s: tuple(int(c) for c in s.split(",")),
                   help="certificate window extents a,b,c")
    q.set_defaults(func=cmd_expansive)

    q = sub.add_parser("scan", **sub_kw, help="scan rational directions")
    q.add_argument("--sys")
    q.add_argument("--builtin")
    q.add_argument("--k", type=int, default=1, help="direction dimension")
    q.add_argument("--height", type=int, default=2)
    q.add_argument("--full", action="store_true", help="emit all rows as JSON")
    q.add_argument("--tmax", type=int, dest="t_max")
    q.add_argument("--evidence-n", type=int, dest="evidence_n")
    q.add_argument("--window", type=lambda s: tuple(int(c) for c in s.split(",")))
    q.add_argument("--workers", type=int)
    q.set_defaults(func=cmd_scan)

    q = sub.add_parser("verify", **sub_kw, help="deterministic property suite")
    q.set_defaults(func=cmd_verify)
    return p


def dispatch(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args)
        return args.func(args, cfg)
    except CliError as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 2
    except BrokenPipeError:
        return 0


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
