"""Command-line interface.

Every command writes exactly one JSON document (sorted keys) to stdout and
logs to stderr.  Exit codes: 0 success, 1 property violated, 2 bad input.
Files are written only when ``--out`` is given.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import arrangements as arr
from . import bundle, groups, homotopy, paths, verify
from .clifford import CliffordElement
from .errors import ConfSpaceError, InputError
from .geometry import (
    DEFAULT_TOL,
    EXACT_TOL,
    Ambient,
    Configuration,
    SpaceSpec,
    is_member,
    sample,
)

log = logging.getLogger("confspace")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _json_default(o: Any):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (set, frozenset, tuple)):
        return list(o)
    return str(o)


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, default=_json_default)


def _load_json(text: str) -> Any:
    """A JSON literal, or @path to read it from a file."""
    if text.startswith("@"):
        text = Path(text[1:]).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from None


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("CONFSPACE_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise InputError(f"CONFSPACE_SEED must be an integer, got {env!r}") from None


def _spec(args, n: int | None = None) -> SpaceSpec:
    if args.ambient is None:
        raise InputError("--ambient is required")
    ambient = Ambient.parse(args.ambient)
    dim = args.d if ambient is Ambient.EUCLIDEAN and args.d is not None else args.m
    if dim is None:
        raise InputError("--m (or --d for euclidean) is required")
    k = args.k
    n = n if n is not None else getattr(args, "n", None)
    if k is None:
        raise InputError("--k is required")
    return SpaceSpec(ambient, dim, k, n if n is not None else k)


def _config(args, text: str | None = None) -> Configuration:
    data = _load_json(text if text is not None else args.config)
    tol = EXACT_TOL if getattr(args, "exact", False) else DEFAULT_TOL
    if isinstance(data, dict):
        return Configuration.from_dict(data, tol)
    return Configuration.build(_spec(args, n=len(data)), data, tol)


def _write(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
        log.info("wrote %s", args.out)


def _add_spec(p, n: bool = True):
    p.add_argument("--ambient", help="euclidean | sphere | rp")
    p.add_argument("--m", type=int, help="dimension of S^m or RP^m")
    p.add_argument("--d", type=int, help="dimension of R^d")
    p.add_argument("--k", type=int)
    if n:
        p.add_argument("--n", type=int)


def _loop_path(text: str, samples: int) -> paths.SampledPath:
    """'beta1*beta2*beta1' (concatenation of named loops) or @file from SampledPath.to_list."""
    if text.startswith("@"):
        return paths.SampledPath.from_list(_load_json(text))
    parts = [paths.loop_path(paths.NamedLoop.parse(w), samples) for w in text.split("*")]
    out = parts[0]
    for p in parts[1:]:
        out = out.concat(p)
    return out


# -- commands -------------------------------------------------------------------------------

def cmd_check(args) -> tuple[dict, int]:
    c = _config(args)
    member = is_member(c, EXACT_TOL if c.exact else DEFAULT_TOL)
    return {"member": member, "space": str(c.spec)}, 0 if member else 1


def cmd_sample(args) -> tuple[dict, int]:
    spec = _spec(args)
    seed = _seed(args)
    configs = [sample(spec, seed=[seed, i]) for i in range(args.count)]
    if args.out:
        if args.out.endswith(".csv"):
            with open(args.out, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["sample", "point"] + [f"x{j + 1}" for j in range(spec.coord_dim)])
                for i, c in enumerate(configs):
                    for j, p in enumerate(c.points):
                        w.writerow([i, j, *map(repr, p.tolist())])
        else:
            _write(args, dumps([c.to_dict() for c in configs]))
    return {"seed": seed, "space": str(spec), "samples": [c.to_dict() for c in configs]}, 0


def cmd_retract(args) -> tuple[dict, int]:
    c = _config(args)
    if args.kind == "gs":
        out = bundle.gs_retraction(c, args.t)
    elif args.t == 1.0:
        out = bundle.unitize(c)
    else:
        out = bundle.unitize_retraction(c, args.t)
    return {"kind": args.kind, "t": args.t, "result": out.to_dict(), "member": is_member(out)}, 0


def cmd_section(args) -> tuple[dict, int]:
    c = _config(args)
    out = bundle.section_sum(c) if args.kind == "sum" else bundle.section_orth(c)
    ok = bool(np.allclose(bundle.project(out).points, c.points, rtol=0, atol=1e-12))
    return {"kind": args.kind, "result": out.to_dict(), "projects_back": ok}, 0 if ok else 1


def cmd_trivialize(args) -> tuple[dict, int]:
    x = _config(args)
    y = np.asarray(_load_json(args.point), dtype=float)
    if args.inverse:
        z, back = bundle.untrivialize(x, y), None
    else:
        z = bundle.trivialize(x, y)
        back = bundle.untrivialize(x, z)
    out = {"point": z.tolist(), "inverse": bool(args.inverse)}
    code = 0
    if back is not None:
        err = float(np.abs(back - y).max())
        out["round_trip_error"] = err
        code = 0 if err <= 1e-9 else 1
    return out, code


def cmd_lift(args) -> tuple[dict, int]:
    path = _loop_path(args.loop, args.samples)
    lift = paths.cover_lift(path)
    out = {"start": lift.start.to_dict(), "end": lift.end.to_dict(), "samples": len(lift)}
    if args.out:
        _write(args, dumps(lift.to_list()))
    return out, 0


def cmd_monodromy(args) -> tuple[dict, int]:
    path = _loop_path(args.loop, args.samples)
    return {"loop": args.loop, "monodromy": str(paths.monodromy(path))}, 0


def cmd_spin(args) -> tuple[dict, int]:
    path = _loop_path(args.loop, args.samples)
    base = path
    for _ in range(args.power - 1):
        path = path.concat(base)
    lift = paths.spin_lift(path, relative=args.relative)
    return {"loop": args.loop, "power": args.power, "lift": lift.label()}, 0


def cmd_arrangement(args) -> tuple[dict, int]:
    if args.config is not None:
        q = arr.QSpec(_config(args), args.arity)
        out = {"components": arr.count_components_complement(q), "arity": args.arity}
        if args.samples:
            hits = arr.sample_cells(q, args.samples, seed=_seed(args))
            out["sampled_components"] = len(hits)
        return out, 0
    if args.m is None:
        raise InputError("give --m, or --config with --arity")
    out = arr.arrangement_report(args.m)
    if args.graphs:
        q = arr.standard_q(args.m)
        out["graph_model"] = arr.graph_model(q).to_dict()
        out["dual_graph_model"] = arr.dual_graph(q).to_dict()
    if args.out:
        _write(args, dumps(out))
    return out, 0


def _group_from_args(args) -> groups.FiniteGroup:
    if args.table:
        return groups.FiniteGroup.from_dict(_load_json(args.table))
    if args.m is None:
        raise InputError("give --m or --table")
    return groups.pi1_extension_group(args.m)


def cmd_group(args) -> tuple[dict, int]:
    g = groups.pi1_extension_group(args.m)
    out: dict = {"order": g.order, "name": groups.identify(g).label}
    if args.stats:
        out["orders"] = {str(k): v for k, v in groups.order_statistics(g).items()}
    if args.table:
        out["table"] = g.to_dict()
    if args.out:
        _write(args, dumps(g.to_dict()))
    return out, 0


def cmd_identify(args) -> tuple[dict, int]:
    g = _group_from_args(args)
    name = groups.identify(g)
    out = {"name": name.label, "invariants": name.invariants}
    code = 0
    if args.gens:
        gens = {k: _parse_element(g, v) for k, v in _load_json(args.gens).items()}
        rep = groups.check_presentation(g, gens, args.relation)
        out["presentation"] = rep.to_dict()
        code = 0 if rep.ok else 1
    return out, code


def _parse_element(g: groups.FiniteGroup, text: str) -> int:
    try:
        return g.index(CliffordElement.parse(text))
    except InputError:
        return g.index(text)


def cmd_homotopy(args) -> tuple[dict, int]:
    spec = _spec(args)
    if args.p is None:
        raise InputError("--p is required")
    return homotopy.query(spec.ambient.value, spec.dim, spec.k, spec.n, args.p), 0


def cmd_verify_all(args) -> tuple[dict, int]:
    seed = _seed(args)
    only = set(args.only) if args.only else None
    numbers = [num for num, *_ in verify.CHECKS if only is None or num in only]
    if args.jobs > 1:
        # checks are independent and pure, so they can run in separate processes
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(verify.run_check, numbers, [seed] * len(numbers),
                                    [args.level] * len(numbers)))
    else:
        results = [verify.run_check(num, seed, args.level) for num in numbers]
    # time limits are stated for the desk level; the report itself omits timings
    timed = args.level == "desk"
    for r in results:
        print(r.line(timed), file=sys.stderr)
    rep = verify.report(results, seed, args.level)
    if args.out:
        _write(args, dumps(rep))
    in_time = all(r.within_limit for r in results) or not timed
    return rep, 0 if rep["passed"] and in_time else 1


# -- parser --------------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="confspace", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=fn)
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        return p

    p = add("check", cmd_check, "membership test for a configuration")
    _add_spec(p, n=False)
    p.add_argument("--config", required=True, help="JSON list of points or @file")
    p.add_argument("--exact", action="store_true", help="rational arithmetic")

    p = add("sample", cmd_sample, "seeded random members")
    _add_spec(p)
    p.add_argument("--count", type=int, default=1)

    p = add("retract", cmd_retract, "Gram-Schmidt or unitization retraction")
    _add_spec(p, n=False)
    p.add_argument("--config", required=True)
    p.add_argument("--kind", choices=["gs", "unitize"], default="gs")
    p.add_argument("--t", type=float, default=1.0)

    p = add("section", cmd_section, "cross-sections of the forgetful map")
    _add_spec(p, n=False)
    p.add_argument("--config", required=True)
    p.add_argument("--kind", choices=["sum", "orth"], default="orth")

    p = add("trivialize", cmd_trivialize, "fiber map f_x and its inverse")
    _add_spec(p, n=False)
    p.add_argument("--config", required=True, help="base point x")
    p.add_argument("--point", required=True, help="fiber point y as JSON")
    p.add_argument("--inverse", action="store_true")

    for name, fn, help_ in [("lift", cmd_lift, "lift a projective loop to the sphere"),
                            ("monodromy", cmd_monodromy, "deck transformation of a loop"),
                            ("spin", cmd_spin, "spin lift of a rotation loop")]:
        p = add(name, fn, help_)
        p.add_argument("--loop", required=True,
                       help="named loops joined by '*', e.g. beta1*beta2, alpha:3; or @file")
        p.add_argument("--samples", type=int, default=65)
        if name == "spin":
            p.add_argument("--power", type=int, default=1)
            p.add_argument("--relative", action="store_true")

    p = add("arrangement", cmd_arrangement, "arrangement graphs and component counts")
    _add_spec(p, n=False)
    p.add_argument("--config", help="base configuration for a custom Q")
    p.add_argument("--arity", type=int)
    p.add_argument("--samples", type=int, default=0)
    p.add_argument("--graphs", action="store_true")

    p = add("group", cmd_group, "the group pi_1(W_{m,m}(RP^m))")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--stats", action="store_true")
    p.add_argument("--table", action="store_true")

    p = add("identify", cmd_identify, "name a finite group")
    p.add_argument("--m", type=int)
    p.add_argument("--table", help="group JSON or @file")
    p.add_argument("--gens", help='generator images, e.g. {"b1": "e34"}')
    p.add_argument("--relation", action="append", default=[])

    p = add("homotopy", cmd_homotopy, "symbolic homotopy groups")
    _add_spec(p)
    p.add_argument("--p", type=int)

    p = add("verify-all", cmd_verify_all, "run the acceptance checks")
    p.add_argument("--level", choices=sorted(verify.LEVELS), default="desk")
    p.add_argument("--only", type=int, action="append")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except InputError as exc:
        print(dumps({"error": str(exc)}))
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        out, code = args.func(args)
    except (ConfSpaceError, ValueError, OSError) as exc:
        print(dumps({"error": str(exc), "type": type(exc).__name__}))
        return 2
    print(dumps(out))
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
