"""Command-line front end: ``qdopt {eval,cq,kkt,cone,list} ...``.

Exit codes: 0 analysis completed (any verdict), 2 invalid input,
3 selection budget exhausted.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import __version__
from .analysis import InvalidProblem, analyze, probe_directions
from .calculus import ExactnessError, InfeasibleAnchor, dir_deriv, quasidiff
from .cq import (DEFAULT_BUDGET, EXHAUSTED_BUDGET, InvalidSelection, check_cq,
                 check_qd_mfcq, general_position_cq, parse_selection,
                 passing_selections, search_selection, selection_count)
from .expr import ParseError
from .geometry import fmt_vector, general_position_at, negate, vec
from .optimality import build_cone_k, sample_cone_rays
from .problem import (ProblemFormatError, bundled_names, load, load_bundled,
                      validate)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_BUDGET = 3


class UsageError(Exception):
    pass


def _vector(text: str):
    try:
        return vec(s.strip() for s in text.strip().strip("()").split(","))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad vector {text!r}") from exc


def _load(args):
    path = Path(args.file)
    if path.exists():
        p = load(path)
    elif args.file in bundled_names():
        p = load_bundled(args.file)
    else:
        raise UsageError(f"no such file or bundled problem: {args.file}")
    if getattr(args, "lenient", False):
        p = dataclasses.replace(p, lenient=True)
    return p


def _require_valid(p):
    bad = validate(p)
    if bad:
        raise InvalidProblem(bad)


def cmd_eval(args, out) -> int:
    p = _load(args)
    at = _vector(args.at) if args.at else p.anchor
    if len(at) != p.n:
        raise UsageError(f"--at point has dimension {len(at)}, expected {p.n}")
    dirs = [_vector(d) for d in args.dir or ()]
    out.write(f"point {fmt_vector(at)}\n")
    for label, e in p.functions():
        q = quasidiff(e, at, p.lenient)
        out.write(f"{label}:\n  sub = {q.sub.canonical()}\n  sup = {q.sup.canonical()}\n")
        for v in dirs:
            out.write(f"  {label}'(x; {fmt_vector(v)}) = {dir_deriv(q, v)}\n")
    return EXIT_OK


def cmd_cq(args, out) -> int:
    p = _load(args)
    _require_valid(p)
    code = EXIT_OK
    if args.selection:
        sel = parse_selection(args.selection, p)
        w = check_cq(p, sel)
        out.write(f"selection {sel.describe(p.active)}: "
                  f"{'CQ holds' if w else 'CQ fails'}\n")
        if w:
            _write_witness(out, w)
    elif args.all_selections:
        found = passing_selections(p, args.budget)
        out.write(f"{len(found)} passing vertex selection(s)\n")
        for sel, w in found:
            out.write(f"  {sel.describe(p.active)} (margin {w.margin})\n")
    else:
        r = search_selection(p, args.budget)
        if r.found:
            out.write(f"Found: {r.selection.describe(p.active)} after {r.checked} candidate(s)\n")
            _write_witness(out, r.witness)
        elif r.status == EXHAUSTED_BUDGET:
            out.write(f"Exhausted (budget {args.budget} of {selection_count(p)} selections)\n")
            code = EXIT_BUDGET
        else:
            out.write(f"Exhausted (complete over vertices, {r.checked} selection(s))\n")
    m = check_qd_mfcq(p)
    out.write(f"q.d.-MFCQ: {'holds' if m.holds else 'fails'}"
              f" (strongly independent: {m.strongly_independent},"
              f" v0 exists: {m.v0 is not None})\n")
    dirs = [_vector(d) for d in args.probe_dir] if args.probe_dir else probe_directions(p.n)
    for j, q in zip(p.active, p.qd_active):
        z = general_position_cq(q)
        out.write(f"g{j + 1}: z* with 0 not in sub + z*: "
                  f"{fmt_vector(z) if z is not None else 'none'}\n")
        for v in dirs:
            ok = general_position_at(v, q.sub, negate(q.sup))
            out.write(f"  general position of (sub, -sup) at v = {fmt_vector(v)}: "
                      f"{'holds' if ok else 'fails'}\n")
    return code


def _write_witness(out, w):
    for i, v in enumerate(w.v_list):
        out.write(f"  v{i + 1} = {fmt_vector(v)}\n")
    for i, v in enumerate(w.w_list):
        out.write(f"  w{i + 1} = {fmt_vector(v)}\n")
    out.write(f"  v0 = {fmt_vector(w.v0)}\n  margin = {w.margin}\n")


def cmd_kkt(args, out) -> int:
    p = _load(args)
    sel = parse_selection(args.selection, p) if args.selection else None
    rep = analyze(p, args.budget, sel)
    out.write(rep.to_text())
    if args.sample:
        from .oracle import SamplingConfig, local_improvement
        b = local_improvement(p, cfg=SamplingConfig(seed=args.seed, samples=args.sample))
        if b is None:
            out.write("oracle: no better feasible point found\n")
        else:
            tag = "exact" if b.exact else "floating point"
            out.write(f"oracle: better feasible point {fmt_vector(b.point)} "
                      f"with objective {b.value} ({tag})\n")
    if args.json_out:
        Path(args.json_out).write_text(rep.to_json())
    return EXIT_BUDGET if rep.budget_exhausted else EXIT_OK


def cmd_cone(args, out) -> int:
    p = _load(args)
    _require_valid(p)
    if args.selection:
        sels = [parse_selection(args.selection, p)]
    elif args.all_selections:
        sels = [s for s, _ in passing_selections(p, args.budget)]
    else:
        r = search_selection(p, args.budget)
        if not r.found:
            if not p.equalities and not p.active:
                out.write(f"K = R^{p.n}\n")
                return EXIT_OK
            out.write(f"no selection passes the CQ ({r.status})\n")
            return EXIT_BUDGET if r.status == EXHAUSTED_BUDGET else EXIT_OK
        sels = [r.selection]
    for k, sel in enumerate(sels, 1):
        K = build_cone_k(p, sel)
        head = f"K{k}" if len(sels) > 1 else "K"
        out.write(f"{head}: selection {sel.describe(p.active)}, CQ {'holds' if K.cq else 'fails'}\n")
        out.write(f"  {K.describe().replace('K', head, 1)}\n")
        for a, t in zip(K.rows, K.tags):
            out.write(f"  <{fmt_vector(a)}, v> <= 0   [{t}]\n")
        if args.sample:
            from .oracle import SamplingConfig, contingent_membership
            cfg = SamplingConfig(steps=(1e-3, 1e-4), seed=args.seed)
            rays = sample_cone_rays(K, args.sample, args.seed)
            scores = [contingent_membership(p, p.anchor, v, cfg).score for v in rays]
            worst = max(scores) if scores else 0.0
            out.write(f"  sampled {len(rays)} ray(s): worst contingent score {worst:.3g} "
                      f"({'all below' if worst < cfg.cone_tol else 'not all below'} {cfg.cone_tol})\n")
    return EXIT_OK


def cmd_list(args, out) -> int:
    for name in bundled_names():
        out.write(name + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qdopt", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("file", help="problem file (JSON) or bundled problem name")
        sp.add_argument("--lenient", action="store_true",
                        help="decide activity numerically (tolerance 1e-12), marked inexact")

    sp = sub.add_parser("eval", help="quasidifferentials and directional derivatives")
    common(sp)
    sp.add_argument("--at", help="evaluation point, e.g. '0,1/2'")
    sp.add_argument("--dir", action="append", help="direction v for f'(x; v); repeatable")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("cq", help="constraint qualification report")
    common(sp)
    sp.add_argument("--selection", help="e.g. 'x1=(-1,-1); y1=(0,0); z1=(0,0)'")
    sp.add_argument("--all-selections", action="store_true")
    sp.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    sp.add_argument("--probe-dir", action="append", help="direction for the general-position probe")
    sp.set_defaults(func=cmd_cq)

    sp = sub.add_parser("kkt", help="full analysis and optimality verdict")
    common(sp)
    sp.add_argument("--selection")
    sp.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    sp.add_argument("--json-out", metavar="PATH")
    sp.add_argument("--sample", type=int, default=0, metavar="N",
                    help="also run the sampling oracle for a better feasible point")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_kkt)

    sp = sub.add_parser("cone", help="rows of the cone K")
    common(sp)
    sp.add_argument("--selection")
    sp.add_argument("--all-selections", action="store_true")
    sp.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    sp.add_argument("--sample", type=int, default=0, metavar="N")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_cone)

    sp = sub.add_parser("list", help="names of bundled problems")
    sp.set_defaults(func=cmd_list)
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except (UsageError, ProblemFormatError, ParseError, InvalidSelection,
            InfeasibleAnchor, ExactnessError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID
    except InvalidProblem as exc:
        for v in exc.violations:
            sys.stderr.write(f"error: {v}\n")
        return EXIT_INVALID


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    main_exit()
