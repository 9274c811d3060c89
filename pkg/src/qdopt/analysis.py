"""End-to-end analysis of a problem at its anchor.

Pipeline: quasidifferentials, active set, selection search for the
constraint qualification, cone K, and the per-``y0*`` multiplier test.
The report serializes deterministically (rationals as strings).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .calculus import Quasidifferential
from .cq import (DEFAULT_BUDGET, EXHAUSTED_BUDGET, MfcqReport, SearchResult, Selection,
                 check_qd_mfcq, check_separation_form, general_position_cq,
                 search_selection)
from .geometry import Polytope, Vector, fmt_vector, general_position_at, negate
from .optimality import (ConeK, KKTCertificate, KKTResult, build_cone_k,
                         check_cone_condition, check_normal_cone_condition,
                         search_normal_cone_selection)
from .problem import Problem, validate

SCHEMA = 1

KKT_CONSISTENT = "KKT-consistent"
NON_OPTIMAL = "NonOptimal"
CQ_NOT_ESTABLISHED = "CQ-not-established"

STRUCTURAL_NOTE = ("continuity, upper semicontinuity and Hadamard directional "
                   "differentiability hold structurally for the expression grammar")


class InvalidProblem(ValueError):
    def __init__(self, violations):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


def _s(x) -> str:
    return str(x)


def _v(v) -> list[str]:
    return [str(c) for c in v]


def _poly(P: Polytope) -> list[list[str]]:
    return [_v(p) for p in P.canonical().vertices]


def probe_directions(n: int) -> list[Vector]:
    """``0``, the coordinate directions and the two main diagonals."""
    out = [(Fraction(0),) * n]
    for k in range(n):
        for s in (1, -1):
            e = [Fraction(0)] * n
            e[k] = Fraction(s)
            out.append(tuple(e))
    if n > 1:
        out.append((Fraction(1),) * n)
        out.append((Fraction(-1),) * n)
    return out


@dataclass
class AnalysisReport:
    problem: Problem
    quasidifferentials: dict[str, Quasidifferential]
    active: tuple[int, ...]
    mode: str
    search: Optional[SearchResult] = None
    z_star: Optional[tuple[Vector, ...]] = None
    mfcq: Optional[MfcqReport] = None
    general_position: list = field(default_factory=list)
    cone: Optional[ConeK] = None
    kkt: list = field(default_factory=list)
    classification: str = CQ_NOT_ESTABLISHED
    witness: Optional[Vector] = None
    budget_exhausted: bool = False

    @property
    def exact(self) -> bool:
        return all(q.exact for q in self.quasidifferentials.values())

    @property
    def selection(self) -> Optional[Selection]:
        if self.search is not None and self.search.found:
            return self.search.selection
        if self.z_star is not None:
            return Selection((), (), self.z_star)
        return None

    # -- structured output --------------------------------------------------------

    def to_dict(self) -> dict:
        p = self.problem
        d = {
            "schema": SCHEMA,
            "name": p.name,
            "dim": p.n,
            "anchor": _v(p.anchor),
            "exact": self.exact,
            "assumptions": {"structural": STRUCTURAL_NOTE,
                            "flags": dict(sorted(p.flags.items()))},
            "quasidifferentials": {
                label: {"sub": _poly(q.sub), "sup": _poly(q.sup)}
                for label, q in self.quasidifferentials.items()},
            "active_set": [j + 1 for j in self.active],
            "mode": self.mode,
        }
        cq: dict = {}
        if self.search is not None:
            cq["search"] = {"status": self.search.status, "checked": self.search.checked}
            if self.search.found:
                w = self.search.witness
                cq["selection"] = _selection_dict(self.search.selection, self.active)
                cq["witness"] = {"v": [_v(v) for v in w.v_list], "w": [_v(v) for v in w.w_list],
                                 "v0": _v(w.v0), "margin": _s(w.margin)}
                geo = check_separation_form(p, self.search.selection)
                cq["separation_form"] = geo.holds
        if self.mode == "normal-cone":
            cq["normal_cone"] = {"z_star": None if self.z_star is None else [_v(z) for z in self.z_star]}
        if self.mfcq is not None:
            cq["qd_mfcq"] = {"holds": self.mfcq.holds,
                             "strongly_independent": list(self.mfcq.independent),
                             "inequalities_separated": self.mfcq.inequalities_separated,
                             "v0": None if self.mfcq.v0 is None else _v(self.mfcq.v0)}
        cq["general_position"] = [
            {"function": f, "pair": pair, "direction": _v(v), "in_general_position": ok}
            for f, pair, v, ok in self.general_position]
        d["cq"] = cq
        if self.cone is not None:
            d["cone_k"] = {"rows": [{"normal": _v(a), "source": t}
                                    for a, t in zip(self.cone.rows, self.cone.tags)],
                           "description": self.cone.describe()}
        d["kkt"] = [_kkt_dict(r) for r in self.kkt]
        d["classification"] = self.classification
        d["witness_y0"] = None if self.witness is None else _v(self.witness)
        d["budget_exhausted"] = self.budget_exhausted
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"

    # -- human readable -------------------------------------------------------------

    def to_text(self) -> str:
        p = self.problem
        lines = [f"problem {p.name or '(unnamed)'}: dim {p.n}, anchor {fmt_vector(p.anchor)}"]
        if not self.exact:
            lines.append("warning: some decisions were made numerically (lenient mode)")
        lines.append("quasidifferentials:")
        for label, q in self.quasidifferentials.items():
            lines.append(f"  {label}: sub = {q.sub.canonical()}, sup = {q.sup.canonical()}")
        lines.append("active inequalities: " +
                     (", ".join(f"g{j + 1}" for j in self.active) or "none"))
        if self.search is not None:
            s = self.search
            if s.found:
                lines.append(f"CQ: found selection {s.selection.describe(self.active)}"
                             f" after {s.checked} candidate(s)")
                w = s.witness
                for i, v in enumerate(w.v_list):
                    lines.append(f"  v{i + 1} = {fmt_vector(v)}")
                for i, v in enumerate(w.w_list):
                    lines.append(f"  w{i + 1} = {fmt_vector(v)}")
                lines.append(f"  v0 = {fmt_vector(w.v0)}, margin {w.margin}")
            else:
                lines.append(f"CQ: {s.status} after {s.checked} candidate(s)")
        if self.mode == "normal-cone":
            if self.z_star is None:
                lines.append("normal-cone CQ: no vertex z* passes")
            else:
                lines.append("normal-cone CQ: holds with " +
                             ", ".join(f"z{j + 1}*={fmt_vector(z)}"
                                       for j, z in zip(self.active, self.z_star)))
        if self.mfcq is not None:
            lines.append(f"q.d.-MFCQ: {'holds' if self.mfcq.holds else 'fails'}"
                         f" (strongly independent: {self.mfcq.strongly_independent},"
                         f" v0 exists: {self.mfcq.v0 is not None})")
        for f, pair, v, ok in self.general_position:
            if not ok:
                lines.append(f"general position fails for {f} {pair} at v = {fmt_vector(v)}")
        if self.cone is not None:
            lines.append(f"cone K ({len(self.cone.rows)} rows): {self.cone.describe()}")
            for a, t in zip(self.cone.rows, self.cone.tags):
                lines.append(f"  <{fmt_vector(a)}, v> <= 0   [{t}]")
        for r in self.kkt:
            y0 = fmt_vector(r.y0_star)
            if r.certified:
                c = r.certificate
                lines.append(f"y0* = {y0}: certified, lambda = {_fmt_list(c.lambdas)}"
                             + (f", mu_under = {_fmt_list(c.mu_under)}, mu_over = {_fmt_list(c.mu_over)}"
                                if c.mu_under else ""))
            else:
                lines.append(f"y0* = {y0}: refuted")
        if self.classification == NON_OPTIMAL:
            lines.append(f"NONOPTIMAL: no multipliers satisfy {self._inclusion_text(self.witness)}")
        elif self.classification == KKT_CONSISTENT:
            lines.append("KKT-consistent (over the vertices of the objective superdifferential)")
        else:
            lines.append("CQ not established: no optimality verdict")
        return "\n".join(lines) + "\n"

    def _inclusion_text(self, y0) -> str:
        from .geometry import translate
        p = self.problem
        sel = self.selection
        parts = [str(translate(p.qd_objective.sub, y0))]
        for k, j in enumerate(self.active):
            q = p.qd_inequalities[j]
            parts.append(f"lambda{j + 1}*{translate(q.sub, sel.z_star[k])}")
        if p.equalities:
            parts.append("cone{C_i}")
        if self.mode == "normal-cone" and p.set_A is not None and p.set_A.rows:
            parts.append("N_A")
        lams = ", ".join(f"lambda{j + 1}" for j in self.active)
        prefix = f"{lams} >= 0 with " if lams else ""
        return prefix + "0 in " + " + ".join(parts)


def _fmt_list(xs) -> str:
    return "(" + ", ".join(str(x) for x in xs) + ")"


def _selection_dict(sel: Selection, active) -> dict:
    return {"x": [_v(p) for p in sel.x_star], "y": [_v(p) for p in sel.y_star],
            "z": {f"g{j + 1}": _v(z) for j, z in zip(active, sel.z_star)}}


def _kkt_dict(r) -> dict:
    d = {"y0": _v(r.y0_star), "status": r.status}
    c: Optional[KKTCertificate] = r.certificate
    if c is not None:
        d["lambda"] = [_s(x) for x in c.lambdas]
        d["mu_under"] = [_s(x) for x in c.mu_under]
        d["mu_over"] = [_s(x) for x in c.mu_over]
        d["combo"] = [{"source": t, "point": _v(p), "weight": _s(w)}
                      for t, p, w in c.combo if w != 0]
    return d


def _general_position_probes(problem: Problem) -> list:
    out = []
    dirs = probe_directions(problem.n)
    for k, (j, q) in enumerate(zip(problem.active, problem.qd_active)):
        for v in dirs:
            out.append((f"g{j + 1}", "(sub, -sup)", v, general_position_at(v, q.sub, negate(q.sup))))
    for i, q in enumerate(problem.qd_equalities):
        for v in dirs:
            out.append((f"f{i + 1}", "(sub, -sup)", v, general_position_at(v, q.sub, negate(q.sup))))
            out.append((f"f{i + 1}", "(sup, -sub)", v, general_position_at(v, q.sup, negate(q.sub))))
    return out


def analyze(problem: Problem, budget: int = DEFAULT_BUDGET,
            selection: Optional[Selection] = None) -> AnalysisReport:
    """Run the full pipeline; raises :class:`InvalidProblem` on named violations."""
    violations = validate(problem)
    if problem.set_A is not None and problem.equalities:
        violations.append("set A is only supported for problems without equality constraints")
    if violations:
        raise InvalidProblem(violations)
    qds = {"f0": problem.qd_objective}
    qds.update({f"f{i + 1}": q for i, q in enumerate(problem.qd_equalities)})
    qds.update({f"g{j + 1}": q for j, q in enumerate(problem.qd_inequalities)})
    mode = "normal-cone" if problem.set_A is not None else "cone"
    rep = AnalysisReport(problem, qds, problem.active, mode)
    rep.mfcq = check_qd_mfcq(problem)
    rep.general_position = _general_position_probes(problem)
    y0s = problem.qd_objective.sup.canonical().vertices

    if mode == "normal-cone":
        if selection is not None:
            z, checked = selection.z_star, 1
            from .optimality import normal_cone_cq
            if not normal_cone_cq(problem, z):
                z = None
        else:
            z, checked = search_normal_cone_selection(problem, budget)
        rep.z_star = z
        if z is None:
            from .cq import selection_count
            rep.budget_exhausted = checked >= budget and selection_count(problem) > budget
            return rep
        for y0 in y0s:
            r = check_normal_cone_condition(problem, z, y0)
            rep.kkt.append(r)
            if not r.certified:
                rep.classification, rep.witness = NON_OPTIMAL, y0
                return rep
        rep.classification = KKT_CONSISTENT
        return rep

    if selection is not None:
        from .cq import check_cq, FOUND, EXHAUSTED_COMPLETE
        w = check_cq(problem, selection)
        rep.search = (SearchResult(FOUND, selection, w, 1) if w is not None
                      else SearchResult(EXHAUSTED_COMPLETE, checked=1))
    else:
        rep.search = search_selection(problem, budget)
    if not rep.search.found:
        rep.budget_exhausted = rep.search.status == EXHAUSTED_BUDGET
        return rep
    sel = rep.search.selection
    rep.cone = build_cone_k(problem, sel, check=False)
    rep.cone = ConeK(rep.cone.dim, rep.cone.rows, rep.cone.tags, True)
    for y0 in y0s:
        r = check_cone_condition(problem, sel, y0)
        rep.kkt.append(r)
        if not r.certified:
            rep.classification, rep.witness = NON_OPTIMAL, y0
            return rep
    rep.classification = KKT_CONSISTENT
    return rep


__all__ = ["AnalysisReport", "InvalidProblem", "analyze", "probe_directions", "SCHEMA",
           "KKT_CONSISTENT", "NON_OPTIMAL", "CQ_NOT_ESTABLISHED"]
