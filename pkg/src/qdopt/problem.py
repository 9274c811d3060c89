"""Problem container and the JSON problem-file format.

A problem is

    minimize f0(x)  subject to  f_i(x) = 0 (i in I),  g_j(x) <= 0 (j in J),  x in A

analysed at a fixed anchor point.  ``A`` is an optional polyhedron
``{x : <a_k, x> <= b_k}``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .calculus import (ExactnessError, InfeasibleAnchor, Quasidifferential,
                       active_set, eval_value, quasidiff)
from .expr import Const, Expr, ParseError, max_var_index, parse, to_source
from .geometry import Vector, dot, vec

KNOWN_FLAGS = ("uniform_dd", "hadamard_dd", "continuous_near_anchor")


class ProblemFormatError(ValueError):
    pass


@dataclass(frozen=True)
class PolyhedralSet:
    """``{x : <a_k, x> <= b_k for every row}``; no rows means the whole space."""

    rows: tuple[tuple[Vector, Fraction], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "rows",
                           tuple((vec(a), Fraction(b)) for a, b in self.rows))

    def contains(self, x) -> bool:
        return all(dot(a, x) <= b for a, b in self.rows)

    def active_rows(self, x) -> tuple[Vector, ...]:
        return tuple(a for a, b in self.rows if dot(a, x) == b)


@dataclass(frozen=True)
class Problem:
    n: int
    anchor: Vector
    objective: Expr = field(default_factory=lambda: Const(Fraction(0)))
    equalities: tuple[Expr, ...] = ()
    inequalities: tuple[Expr, ...] = ()
    set_A: Optional[PolyhedralSet] = None
    flags: Mapping[str, bool] = field(default_factory=dict)
    lenient: bool = False
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "anchor", vec(self.anchor))
        object.__setattr__(self, "equalities", tuple(self.equalities))
        object.__setattr__(self, "inequalities", tuple(self.inequalities))
        object.__setattr__(self, "flags", dict(self.flags))

    def __hash__(self):
        return hash((self.n, self.anchor, self.objective, self.equalities, self.inequalities))

    @cached_property
    def qd_objective(self) -> Quasidifferential:
        return quasidiff(self.objective, self.anchor, self.lenient)

    @cached_property
    def qd_equalities(self) -> tuple[Quasidifferential, ...]:
        return tuple(quasidiff(f, self.anchor, self.lenient) for f in self.equalities)

    @cached_property
    def qd_inequalities(self) -> tuple[Quasidifferential, ...]:
        return tuple(quasidiff(g, self.anchor, self.lenient) for g in self.inequalities)

    @cached_property
    def active(self) -> tuple[int, ...]:
        return active_set(self)

    @property
    def qd_active(self) -> tuple[Quasidifferential, ...]:
        return tuple(self.qd_inequalities[j] for j in self.active)

    def functions(self):
        """``(label, expr)`` pairs for the objective and every constraint."""
        yield "f0", self.objective
        for i, f in enumerate(self.equalities, 1):
            yield f"f{i}", f
        for j, g in enumerate(self.inequalities, 1):
            yield f"g{j}", g


def validate(problem: Problem) -> list[str]:
    """Named violations of the checkable hypotheses; empty means Ok."""
    out = []
    if len(problem.anchor) != problem.n:
        out.append(f"dimension mismatch: anchor has {len(problem.anchor)} entries, dim is {problem.n}")
        return out
    for label, e in problem.functions():
        k = max_var_index(e)
        if k >= problem.n:
            out.append(f"dimension mismatch: {label} uses x{k + 1} but dim is {problem.n}")
    if out:
        return out
    for label, e in problem.functions():
        try:
            pv = eval_value(e, problem.anchor)
        except ExactnessError as exc:  # pragma: no cover - eval_value is lenient by default
            out.append(f"not exactly evaluable: {label} ({exc})")
            continue
        if not pv.exact and not problem.lenient:
            out.append(f"not exactly evaluable: {label} at the anchor")
            continue
        v = pv.value if pv.exact else Fraction(float(pv.value))
        if label.startswith("f") and label != "f0" and v != 0:
            out.append(f"anchor infeasible (equality {label[1:]}): {label}(anchor) = {v} != 0")
        if label.startswith("g") and v > 0:
            out.append(f"anchor infeasible (inequality {label[1:]}): {label}(anchor) = {v} > 0")
    if problem.set_A is not None and not problem.set_A.contains(problem.anchor):
        out.append("anchor infeasible (set A)")
    for key in problem.flags:
        if key not in KNOWN_FLAGS:
            out.append(f"unknown flag: {key}")
    if not out:
        for label, e in problem.functions():
            try:
                quasidiff(e, problem.anchor, problem.lenient)
            except ExactnessError as exc:
                out.append(f"not exactly evaluable: {label} ({exc})")
    return out


# -- file format ---------------------------------------------------------------

def _rational(s, where: str) -> Fraction:
    if isinstance(s, bool) or not isinstance(s, (int, str)):
        raise ProblemFormatError(f"{where}: rationals must be integers or 'p/q' strings, got {s!r}")
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ProblemFormatError(f"{where}: bad rational {s!r}") from exc


def _expr(text, where: str) -> Expr:
    if not isinstance(text, str):
        raise ProblemFormatError(f"{where}: expected an expression string")
    try:
        return parse(text)
    except ParseError as exc:
        raise ProblemFormatError(f"{where}: {exc}") from exc


def from_dict(d: Mapping, name: str = "") -> Problem:
    unknown = set(d) - {"dim", "anchor", "objective", "equalities", "inequalities",
                        "set_A", "flags", "name", "lenient"}
    if unknown:
        raise ProblemFormatError(f"unknown keys: {', '.join(sorted(unknown))}")
    try:
        n = d["dim"]
        anchor = d["anchor"]
    except KeyError as exc:
        raise ProblemFormatError(f"missing key {exc.args[0]!r}") from None
    if not isinstance(n, int) or n < 1:
        raise ProblemFormatError("dim must be a positive integer")
    anchor = tuple(_rational(a, f"anchor[{k}]") for k, a in enumerate(anchor))
    objective = _expr(d.get("objective", "0"), "objective")
    eqs = tuple(_expr(s, f"equalities[{k}]") for k, s in enumerate(d.get("equalities", [])))
    ineqs = tuple(_expr(s, f"inequalities[{k}]") for k, s in enumerate(d.get("inequalities", [])))
    set_A = None
    if d.get("set_A") is not None:
        rows = []
        for k, r in enumerate(d["set_A"]):
            coeffs = tuple(_rational(c, f"set_A[{k}].coeffs") for c in r["coeffs"])
            if len(coeffs) != n:
                raise ProblemFormatError(f"set_A[{k}]: expected {n} coefficients")
            rows.append((coeffs, _rational(r["rhs"], f"set_A[{k}].rhs")))
        set_A = PolyhedralSet(tuple(rows))
    flags = dict(d.get("flags", {}))
    return Problem(n, anchor, objective, eqs, ineqs, set_A, flags,
                   bool(d.get("lenient", False)), d.get("name", name))


def to_dict(p: Problem) -> dict:
    d = {"dim": p.n, "anchor": [str(a) for a in p.anchor],
         "objective": to_source(p.objective),
         "equalities": [to_source(f) for f in p.equalities],
         "inequalities": [to_source(g) for g in p.inequalities]}
    if p.set_A is not None:
        d["set_A"] = [{"coeffs": [str(c) for c in a], "rhs": str(b)} for a, b in p.set_A.rows]
    if p.flags:
        d["flags"] = dict(sorted(p.flags.items()))
    if p.lenient:
        d["lenient"] = True
    if p.name:
        d["name"] = p.name
    return d


def loads(text: str, name: str = "") -> Problem:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(d, dict):
        raise ProblemFormatError("problem file must be a JSON object")
    return from_dict(d, name)


def dumps(p: Problem) -> str:
    return json.dumps(to_dict(p), indent=2) + "\n"


def load(path) -> Problem:
    path = Path(path)
    return loads(path.read_text(), path.stem)


def bundled_names() -> list[str]:
    root = resources.files("qdopt") / "problems"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_bundled(name: str) -> Problem:
    res = resources.files("qdopt") / "problems" / f"{name}.json"
    if not res.is_file():
        raise FileNotFoundError(f"no bundled problem named {name!r}; try one of {bundled_names()}")
    return loads(res.read_text(), name)
