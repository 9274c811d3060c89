"""Selection-dependent constraint qualification.

For equality constraints ``f_i`` with chosen ``x_i* in sub f_i`` and
``y_i* in sup f_i`` put

    piece_a_i = sub f_i + y_i*          piece_b_i = -x_i* - sup f_i

and for active inequalities ``g_j`` with ``z_j* in sup g_j`` use the shifted
set ``sub g_j + z_j*``.  The qualification asks for three families of
directions, each strictly negative on one set and nonpositive on others.
Strictness is decided by maximizing a margin ``t`` over the box
``|v_k| <= 1``; the condition holds iff the optimum is positive.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from .calculus import Quasidifferential, qd_sum_set
from .geometry import (Polytope, Vector, cone_hull, convex_hull, dot,
                       fmt_vector, member, minkowski_sum, negate,
                       polytope_cone_disjoint, subspace_intersects,
                       support_value, translate, vec, vneg, zeros)
from .lp import LpProblem, solve

DEFAULT_BUDGET = 10 ** 6


class InvalidSelection(ValueError):
    pass


@dataclass(frozen=True)
class Selection:
    """Chosen points: ``x_star[i]``, ``y_star[i]`` per equality and
    ``z_star[k]`` for the k-th *active* inequality (in index order)."""

    x_star: tuple[Vector, ...] = ()
    y_star: tuple[Vector, ...] = ()
    z_star: tuple[Vector, ...] = ()

    def __post_init__(self):
        for name in ("x_star", "y_star", "z_star"):
            object.__setattr__(self, name, tuple(vec(p) for p in getattr(self, name)))

    def describe(self, active: Sequence[int] = ()) -> str:
        parts = [f"x{i + 1}*={fmt_vector(p)}" for i, p in enumerate(self.x_star)]
        parts += [f"y{i + 1}*={fmt_vector(p)}" for i, p in enumerate(self.y_star)]
        labels = [j + 1 for j in active] if active else range(1, len(self.z_star) + 1)
        parts += [f"z{j}*={fmt_vector(p)}" for j, p in zip(labels, self.z_star)]
        return ", ".join(parts) if parts else "(empty)"


@dataclass(frozen=True)
class CiSet:
    piece_a: Polytope
    piece_b: Polytope


@dataclass(frozen=True)
class MarginResult:
    """Optimum of the margin LP: ``t`` and the maximizing direction ``v``."""

    margin: Optional[Fraction]
    direction: Vector

    @property
    def holds(self) -> bool:
        return self.margin is None or self.margin > 0


@dataclass(frozen=True)
class AssumptionCheck:
    holds: bool
    results: tuple[MarginResult, ...] = ()
    violated: Optional[int] = None


@dataclass(frozen=True)
class CQWitness:
    v_list: tuple[Vector, ...]
    w_list: tuple[Vector, ...]
    v0: Vector
    margin: Fraction

    def replay(self, problem, sel: Selection) -> bool:
        """Re-verify every sign condition by direct support evaluation."""
        cis = [build_ci(problem, sel, i) for i in range(len(problem.equalities))]
        for i, (v, w) in enumerate(zip(self.v_list, self.w_list)):
            if support_value(cis[i].piece_a, v) > -self.margin:
                return False
            if support_value(cis[i].piece_b, w) > -self.margin:
                return False
            for k, c in enumerate(cis):
                if k == i:
                    continue
                for d in (v, w):
                    if support_value(c.piece_a, d) > 0 or support_value(c.piece_b, d) > 0:
                        return False
        for c in cis:
            if support_value(c.piece_a, self.v0) > 0 or support_value(c.piece_b, self.v0) > 0:
                return False
        for g in shifted_inequalities(problem, sel):
            if support_value(g, self.v0) > -self.margin:
                return False
        return True


# -- basic constructions -----------------------------------------------------

def validate_selection(problem, sel: Selection) -> None:
    m = len(problem.equalities)
    if len(sel.x_star) != m or len(sel.y_star) != m:
        raise InvalidSelection(f"selection needs {m} x* and y* points")
    if len(sel.z_star) != len(problem.active):
        raise InvalidSelection(f"selection needs {len(problem.active)} z* points (active inequalities)")
    for i, q in enumerate(problem.qd_equalities):
        if len(sel.x_star[i]) != problem.n or not member(q.sub, sel.x_star[i]):
            raise InvalidSelection(f"x{i + 1}* = {fmt_vector(sel.x_star[i])} is not in the subdifferential")
        if len(sel.y_star[i]) != problem.n or not member(q.sup, sel.y_star[i]):
            raise InvalidSelection(f"y{i + 1}* = {fmt_vector(sel.y_star[i])} is not in the superdifferential")
    for k, (j, q) in enumerate(zip(problem.active, problem.qd_active)):
        if len(sel.z_star[k]) != problem.n or not member(q.sup, sel.z_star[k]):
            raise InvalidSelection(f"z{j + 1}* = {fmt_vector(sel.z_star[k])} is not in the superdifferential")


def build_ci(problem, sel: Selection, i: int) -> CiSet:
    q = problem.qd_equalities[i]
    return CiSet(translate(q.sub, sel.y_star[i]),
                 translate(negate(q.sup), vneg(sel.x_star[i])))


def shifted_inequalities(problem, sel: Selection) -> list[Polytope]:
    """``sub g_j + z_j*`` for every active ``j``."""
    return [translate(q.sub, z) for q, z in zip(problem.qd_active, sel.z_star)]


def margin_lp(n: int, strict: Sequence[Polytope], weak: Sequence[Polytope],
              annihilate: Sequence[Vector] = ()) -> MarginResult:
    """Maximize ``t`` over ``|v_k| <= 1`` subject to ``<p, v> <= -t`` on the
    vertices of ``strict``, ``<q, v> <= 0`` on ``weak`` and ``<a, v> = 0``
    on ``annihilate``.  With no strict sets the condition is vacuous and
    the margin is ``None``."""
    if not strict:
        return MarginResult(None, zeros(n))
    one = Fraction(1)
    le = []
    for P in strict:
        for p in P.canonical().vertices:
            le.append((p + (one,), Fraction(0)))
    for Q in weak:
        for q in Q.canonical().vertices:
            le.append((q + (Fraction(0),), Fraction(0)))
    eq = [(vec(a) + (Fraction(0),), Fraction(0)) for a in annihilate]
    bounds = tuple((-one, one) for _ in range(n)) + ((None, None),)
    res = solve(LpProblem(n + 1, (0,) * n + (1,), tuple(eq), tuple(le), bounds))
    assert res.optimal, "margin LP is bounded and v = 0, t = 0 is feasible"
    return MarginResult(res.point[n], res.point[:n])


# -- the three assumptions -------------------------------------------------------

def _pieces_except(cis: Sequence[CiSet], i: Optional[int]) -> list[Polytope]:
    out = []
    for k, c in enumerate(cis):
        if k != i:
            out.extend((c.piece_a, c.piece_b))
    return out


def check_assumption_1(problem, sel: Selection) -> AssumptionCheck:
    cis = [build_ci(problem, sel, i) for i in range(len(problem.equalities))]
    results = []
    for i, c in enumerate(cis):
        r = margin_lp(problem.n, [c.piece_a], _pieces_except(cis, i))
        results.append(r)
        if not r.holds:
            return AssumptionCheck(False, tuple(results), i)
    return AssumptionCheck(True, tuple(results))


def check_assumption_2(problem, sel: Selection) -> AssumptionCheck:
    cis = [build_ci(problem, sel, i) for i in range(len(problem.equalities))]
    results = []
    for i, c in enumerate(cis):
        r = margin_lp(problem.n, [c.piece_b], _pieces_except(cis, i))
        results.append(r)
        if not r.holds:
            return AssumptionCheck(False, tuple(results), i)
    return AssumptionCheck(True, tuple(results))


def check_assumption_3(problem, sel: Selection) -> AssumptionCheck:
    cis = [build_ci(problem, sel, i) for i in range(len(problem.equalities))]
    r = margin_lp(problem.n, shifted_inequalities(problem, sel), _pieces_except(cis, None))
    return AssumptionCheck(r.holds, (r,), None if r.holds else 0)


def check_cq(problem, sel: Selection, validate: bool = True) -> Optional[CQWitness]:
    """Witness for all three assumptions, or ``None`` if one fails."""
    if validate:
        validate_selection(problem, sel)
    a1 = check_assumption_1(problem, sel)
    if not a1.holds:
        return None
    a2 = check_assumption_2(problem, sel)
    if not a2.holds:
        return None
    a3 = check_assumption_3(problem, sel)
    if not a3.holds:
        return None
    margins = [r.margin for r in a1.results + a2.results + a3.results if r.margin is not None]
    margin = min(margins) if margins else Fraction(1)
    return CQWitness(tuple(r.direction for r in a1.results),
                     tuple(r.direction for r in a2.results),
                     a3.results[0].direction, margin)


@dataclass(frozen=True)
class GeometricCheck:
    pieces_a: tuple[bool, ...]
    pieces_b: tuple[bool, ...]
    inequalities: bool

    @property
    def holds(self) -> bool:
        return all(self.pieces_a) and all(self.pieces_b) and self.inequalities


def check_separation_form(problem, sel: Selection) -> GeometricCheck:
    """Disjointness form: each piece of ``C_i`` misses ``cone{-C_k : k != i}``
    and ``co{sub g_j + z_j*}`` misses ``cone{-C_i : all i}``."""
    n = problem.n
    cis = [build_ci(problem, sel, i) for i in range(len(problem.equalities))]
    pa, pb = [], []
    for i, c in enumerate(cis):
        K = cone_hull([negate(P) for P in _pieces_except(cis, i)], n)
        pa.append(polytope_cone_disjoint(c.piece_a, K))
        pb.append(polytope_cone_disjoint(c.piece_b, K))
    gs = shifted_inequalities(problem, sel)
    if gs:
        K = cone_hull([negate(P) for P in _pieces_except(cis, None)], n)
        hull = convex_hull([p for g in gs for p in g.vertices])
        ineq = polytope_cone_disjoint(hull, K)
    else:
        ineq = True
    return GeometricCheck(tuple(pa), tuple(pb), ineq)


def check_geometric(problem, sel: Selection) -> bool:
    return check_separation_form(problem, sel).holds


# -- q.d.-MFCQ -------------------------------------------------------------------

@dataclass(frozen=True)
class MfcqReport:
    independent: tuple[bool, ...]
    inequalities_separated: bool
    v0: Optional[Vector]
    margin: Optional[Fraction]

    @property
    def strongly_independent(self) -> bool:
        return all(self.independent)

    @property
    def holds(self) -> bool:
        return self.strongly_independent and self.v0 is not None


def check_qd_mfcq(problem) -> MfcqReport:
    """Strong linear independence of the sum sets ``sub f_i + sup f_i`` and a
    direction ``v0`` annihilating them that is strictly negative on the sum
    sets of the active inequalities."""
    n = problem.n
    sf = [qd_sum_set(q) for q in problem.qd_equalities]
    sg = [qd_sum_set(q) for q in problem.qd_active]
    indep = []
    for i, S in enumerate(sf):
        span = [p for k, T in enumerate(sf) if k != i for p in T.vertices]
        indep.append(not subspace_intersects(S, span))
    span_all = [p for T in sf for p in T.vertices]
    if sg:
        hull = convex_hull([p for S in sg for p in S.vertices])
        separated = not subspace_intersects(hull, span_all)
    else:
        separated = True
    r = margin_lp(n, sg, (), span_all)
    v0 = r.direction if r.holds else None
    return MfcqReport(tuple(indep), separated, v0, r.margin)


# -- selection search ---------------------------------------------------------------

def _choice_lists(problem) -> list[tuple[Vector, ...]]:
    lists = []
    for q in problem.qd_equalities:
        lists.append(q.sub.canonical().vertices)
        lists.append(q.sup.canonical().vertices)
    for q in problem.qd_active:
        lists.append(q.sup.canonical().vertices)
    return lists


def selection_count(problem) -> int:
    total = 1
    for c in _choice_lists(problem):
        total *= len(c)
    return total


def iter_selections(problem) -> Iterator[Selection]:
    """Vertex selections in lexicographic order of
    ``(x_1*, y_1*, ..., x_m*, y_m*, z*_active...)``."""
    m = len(problem.equalities)
    for combo in itertools.product(*_choice_lists(problem)):
        xs = combo[0:2 * m:2]
        ys = combo[1:2 * m:2]
        yield Selection(xs, ys, combo[2 * m:])


FOUND = "found"
EXHAUSTED_COMPLETE = "exhausted-complete"
EXHAUSTED_BUDGET = "exhausted-budget"


@dataclass(frozen=True)
class SearchResult:
    status: str
    selection: Optional[Selection] = None
    witness: Optional[CQWitness] = None
    checked: int = 0

    @property
    def found(self) -> bool:
        return self.status == FOUND


def search_selection(problem, budget: int = DEFAULT_BUDGET) -> SearchResult:
    """First vertex selection (lexicographic) passing all three assumptions."""
    checked = 0
    for sel in iter_selections(problem):
        if checked >= budget:
            return SearchResult(EXHAUSTED_BUDGET, checked=checked)
        checked += 1
        w = check_cq(problem, sel, validate=False)
        if w is not None:
            return SearchResult(FOUND, sel, w, checked)
    return SearchResult(EXHAUSTED_COMPLETE, checked=checked)


def passing_selections(problem, budget: int = DEFAULT_BUDGET) -> list[tuple[Selection, CQWitness]]:
    out = []
    for k, sel in enumerate(iter_selections(problem)):
        if k >= budget:
            break
        w = check_cq(problem, sel, validate=False)
        if w is not None:
            out.append((sel, w))
    return out


def general_position_cq(q: Quasidifferential) -> Optional[Vector]:
    """First vertex ``z*`` of the superdifferential with ``0 not in sub + z*``.

    Scanning vertices is complete: the failing set ``(-sub) & sup`` is
    convex, so if every vertex of ``sup`` fails then all of ``sup`` fails.
    """
    n = q.dim
    for z in q.sup.canonical().vertices:
        if not member(translate(q.sub, z), zeros(n)):
            return z
    return None


# -- explicit selections from text -----------------------------------------------------

_ENTRY = re.compile(r"\s*([xyz])(\d+)\s*=\s*\(?([^;()]*)\)?\s*")


def parse_selection(text: str, problem) -> Selection:
    """Parse ``"x1=(-1,-1); y1=(0,0); z1=(0,0)"``.

    Indices are 1-based constraint numbers; ``z`` entries are required for
    exactly the active inequalities.
    """
    got: dict[tuple[str, int], Vector] = {}
    for chunk in filter(str.strip, text.split(";")):
        m = _ENTRY.fullmatch(chunk)
        if not m:
            raise InvalidSelection(f"cannot parse selection entry {chunk.strip()!r}")
        try:
            point = vec(s.strip() for s in m.group(3).split(","))
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidSelection(f"bad coordinates in {chunk.strip()!r}") from exc
        got[(m.group(1), int(m.group(2)))] = point
    m_eq = len(problem.equalities)
    try:
        xs = tuple(got.pop(("x", i)) for i in range(1, m_eq + 1))
        ys = tuple(got.pop(("y", i)) for i in range(1, m_eq + 1))
        zs = tuple(got.pop(("z", j + 1)) for j in problem.active)
    except KeyError as exc:
        kind, idx = exc.args[0]
        raise InvalidSelection(f"selection is missing {kind}{idx}*") from None
    if got:
        extra = ", ".join(f"{k}{i}" for k, i in sorted(got))
        raise InvalidSelection(f"selection has entries for no active constraint: {extra}")
    sel = Selection(xs, ys, zs)
    validate_selection(problem, sel)
    return sel


__all__ = [
    "InvalidSelection", "Selection", "CiSet", "MarginResult", "AssumptionCheck", "CQWitness",
    "GeometricCheck", "MfcqReport", "SearchResult", "validate_selection", "build_ci",
    "shifted_inequalities", "margin_lp", "check_assumption_1", "check_assumption_2",
    "check_assumption_3", "check_cq", "check_separation_form", "check_geometric",
    "check_qd_mfcq", "iter_selections", "selection_count", "search_selection",
    "passing_selections", "general_position_cq", "parse_selection",
    "FOUND", "EXHAUSTED_COMPLETE", "EXHAUSTED_BUDGET", "minkowski_sum", "dot",
]
