"""Convex subcones of the contingent cone and KKT-type optimality tests.

Given a selection passing the constraint qualification, the cone

    K = { v : s(P, v) <= 0 for every shifted set P }

(shifted sets: ``sub f_i + y_i*``, ``-x_i* - sup f_i``, ``sub g_j + z_j*``)
lies inside the contingent cone of the feasible set.  At a local minimizer,
for every ``y0* in sup f0``

    0 in sub f0 + y0* + sum_j lam_j (sub g_j + z_j*) + cone{C_i}

with ``C_i`` the union of the two pieces of equality ``i``.  Each such
inclusion is an LP feasibility question over the vertices of the sets
involved; an infeasible LP for some ``y0*`` refutes local optimality.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .calculus import ExactnessError, eval_value
from .cq import (CQWitness, Selection, build_ci, check_cq, shifted_inequalities,
                 validate_selection)
from .geometry import (FinCone, Polytope, Vector, cone_member, dot, fmt_vector,
                       maximize_over, member, nullspace, translate, vadd,
                       vec, vneg, vscale, zeros)
from .lp import feasible


class CQNotEstablished(RuntimeError):
    """Raised when an optimality verdict is requested without a valid CQ."""


class NotCertified(ValueError):
    pass


# -- cone K ------------------------------------------------------------------

@dataclass(frozen=True)
class ConeK:
    """``{v : <a, v> <= 0 for every row}``; ``tags[k]`` names the source of row k."""

    dim: int
    rows: tuple[Vector, ...]
    tags: tuple[str, ...]
    cq: bool = False

    def member(self, v) -> bool:
        v = vec(v)
        if len(v) != self.dim:
            raise ValueError(f"direction has dimension {len(v)}, expected {self.dim}")
        return all(dot(a, v) <= 0 for a in self.rows)

    __contains__ = member

    def extreme_rays(self) -> Optional[list[Vector]]:
        """Extreme rays when ``K`` is pointed (rows span the space); else ``None``.

        A ray of a pointed polyhedral cone is extreme iff it is cut out by
        ``n - 1`` linearly independent tight rows.
        """
        n = self.dim
        if not self.rows:
            return None
        if nullspace(self.rows, n):
            return None
        rays = set()
        for combo in itertools.combinations(range(len(self.rows)), n - 1):
            ns = nullspace([self.rows[k] for k in combo], n)
            if len(ns) != 1:
                continue
            d = _primitive(ns[0])
            for cand in (d, vneg(d)):
                if self.member(cand):
                    rays.add(cand)
        return sorted(rays)

    def describe(self) -> str:
        if not self.rows:
            return f"K = R^{self.dim}"
        rays = self.extreme_rays()
        if rays is None:
            return "K is not pointed (contains a line)"
        if not rays:
            return "K = {0}"
        return "K = cone{" + ", ".join(fmt_vector(r) for r in rays) + "}"


def _primitive(v: Vector) -> Vector:
    """Scale ``v`` so its largest absolute entry is 1."""
    m = max(abs(c) for c in v)
    return tuple(c / m for c in v)


def build_cone_k(problem, sel: Selection, check: bool = True) -> ConeK:
    """One row per vertex of every shifted polytope of the selection."""
    rows, tags = [], []
    for i in range(len(problem.equalities)):
        c = build_ci(problem, sel, i)
        for p in c.piece_a.canonical().vertices:
            rows.append(p)
            tags.append(f"f{i + 1}:sub+y*")
        for p in c.piece_b.canonical().vertices:
            rows.append(p)
            tags.append(f"f{i + 1}:-x*-sup")
    for j, g in zip(problem.active, shifted_inequalities(problem, sel)):
        for p in g.canonical().vertices:
            rows.append(p)
            tags.append(f"g{j + 1}:sub+z*")
    cq = check_cq(problem, sel) is not None if check else False
    return ConeK(problem.n, tuple(rows), tuple(tags), cq)


def cone_k_member(K: ConeK, v) -> bool:
    return K.member(v)


def sample_cone_rays(K: ConeK, count: int = 50, seed: int = 0,
                     attempts: int = 200) -> list[Vector]:
    """Exact points of ``K`` in the box ``|v_k| <= 1``.

    Random objectives are maximized over ``K`` and the box; nonzero optimal
    vertices are then mixed with random nonnegative rational weights, which
    keeps every sample inside ``K``.
    """
    rng = random.Random(seed)
    n = K.dim
    verts = []
    for _ in range(attempts):
        c = [rng.randint(-9, 9) for _ in range(n)]
        v = maximize_over(K.rows, c)
        if v is not None and any(v) and v not in verts:
            verts.append(v)
        if len(verts) >= 2 * n + 2:
            break
    if not verts:
        return [zeros(n)] * count
    out = []
    for _ in range(count):
        weights = [Fraction(rng.randint(0, 8), rng.randint(1, 8)) for _ in verts]
        if not any(weights):
            weights[rng.randrange(len(verts))] = Fraction(1)
        total = sum(weights)
        v = zeros(n)
        for w, p in zip(weights, verts):
            v = vadd(v, vscale(p, w / total))
        out.append(v)
    return out


def polar_check(problem, sel: Selection, candidate) -> bool:
    """Is ``candidate`` in ``cone{C_i}``, the polar of the equality part of ``K``?"""
    gens = []
    for i in range(len(problem.equalities)):
        c = build_ci(problem, sel, i)
        gens.extend(c.piece_a.canonical().vertices)
        gens.extend(c.piece_b.canonical().vertices)
    return cone_member(FinCone(problem.n, tuple(gens)), candidate)


# -- certificates ---------------------------------------------------------------

@dataclass(frozen=True)
class KKTCertificate:
    """Exact multipliers and the combination that reproduces the zero vector.

    ``combo`` lists ``(tag, vertex, coefficient)``.  Tags are ``"f0"`` for
    the objective (convex weights), ``"g<j>"`` for inequality ``j``, and
    ``"f<i>:a"`` / ``"f<i>:b"`` for the two pieces of equality ``i``, or
    ``"N<k>"`` for normal-cone generators.
    """

    y0_star: Vector
    lambdas: tuple[Fraction, ...]
    mu_under: tuple[Fraction, ...]
    mu_over: tuple[Fraction, ...]
    combo: tuple[tuple[str, Vector, Fraction], ...]

    def residual(self) -> Vector:
        n = len(self.y0_star)
        out = zeros(n)
        for _, p, c in self.combo:
            out = vadd(out, vscale(p, c))
        return out

    def replay(self, problem) -> bool:
        """Exact re-verification: zero sum, nonnegativity, regrouping, complementarity."""
        if any(c < 0 for _, _, c in self.combo):
            return False
        if any(self.residual()):
            return False
        if sum(c for t, _, c in self.combo if t == "f0") != 1:
            return False
        for j, lam in enumerate(self.lambdas):
            if lam < 0 or lam != sum(c for t, _, c in self.combo if t == f"g{j + 1}"):
                return False
            if lam != 0 and _ineq_value(problem, j) != 0:
                return False
        for i, (mu_a, mu_b) in enumerate(zip(self.mu_under, self.mu_over)):
            if mu_a != sum(c for t, _, c in self.combo if t == f"f{i + 1}:a"):
                return False
            if mu_b != sum(c for t, _, c in self.combo if t == f"f{i + 1}:b"):
                return False
        return True


def _ineq_value(problem, j) -> Fraction:
    pv = eval_value(problem.inequalities[j], problem.anchor)
    if not pv.exact:
        raise ExactnessError(f"g{j + 1} is not exactly evaluable at the anchor")
    return pv.value


CERTIFIED = "certified"
REFUTED = "refuted"


@dataclass(frozen=True)
class KKTResult:
    status: str
    y0_star: Vector
    certificate: Optional[KKTCertificate] = None

    @property
    def certified(self) -> bool:
        return self.status == CERTIFIED


def _solve_inclusion(n: int, groups: Sequence[tuple[str, Sequence[Vector]]]):
    """Find weights making ``sum w p = 0`` with ``w >= 0`` and the ``"f0"``
    group summing to one.  Returns the combo list or ``None``."""
    cols = [(tag, p) for tag, pts in groups for p in pts]
    k = len(cols)
    eq = [(tuple(p[d] for _, p in cols), Fraction(0)) for d in range(n)]
    eq.append((tuple(Fraction(1 if t == "f0" else 0) for t, _ in cols), Fraction(1)))
    sol = feasible(eq_rows=eq, n_vars=k)
    if sol is None:
        return None
    return tuple((t, p, c) for (t, p), c in zip(cols, sol))


def _objective_shift(problem, y0_star) -> Polytope:
    y0 = vec(y0_star)
    q0 = problem.qd_objective
    if len(y0) != problem.n or not member(q0.sup, y0):
        raise ValueError(f"y0* = {fmt_vector(y0)} is not in the superdifferential of f0")
    return translate(q0.sub, y0)


def check_cone_condition(problem, sel: Selection, y0_star) -> KKTResult:
    """Decide ``0 in sub f0 + y0* + sum lam_j (sub g_j + z_j*) + cone{C_i}``.

    Inactive inequalities carry ``lam_j = 0`` by complementarity, so their
    ``z_j*`` never enter.
    """
    validate_selection(problem, sel)
    y0 = vec(y0_star)
    groups = [("f0", _objective_shift(problem, y0).canonical().vertices)]
    for j, g in zip(problem.active, shifted_inequalities(problem, sel)):
        groups.append((f"g{j + 1}", g.canonical().vertices))
    for i in range(len(problem.equalities)):
        c = build_ci(problem, sel, i)
        groups.append((f"f{i + 1}:a", c.piece_a.canonical().vertices))
        groups.append((f"f{i + 1}:b", c.piece_b.canonical().vertices))
    combo = _solve_inclusion(problem.n, groups)
    if combo is None:
        return KKTResult(REFUTED, y0)
    return KKTResult(CERTIFIED, y0, _certificate(problem, y0, combo))


def _certificate(problem, y0, combo) -> KKTCertificate:
    def total(tag):
        return sum((c for t, _, c in combo if t == tag), Fraction(0))
    lambdas = tuple(total(f"g{j + 1}") for j in range(len(problem.inequalities)))
    m = len(problem.equalities)
    mu_a = tuple(total(f"f{i + 1}:a") for i in range(m))
    mu_b = tuple(total(f"f{i + 1}:b") for i in range(m))
    return KKTCertificate(y0, lambdas, mu_a, mu_b, combo)


def extract_multipliers(problem, sel: Selection, y0_star) -> KKTCertificate:
    r = check_cone_condition(problem, sel, y0_star)
    if not r.certified:
        raise NotCertified(f"no multipliers exist for y0* = {fmt_vector(r.y0_star)}")
    return r.certificate


NON_OPTIMAL = "non-optimal"
CONSISTENT = "consistent-over-vertices"


@dataclass(frozen=True)
class Refutation:
    status: str
    witness: Optional[Vector]
    results: tuple[KKTResult, ...]
    cq_witness: Optional[CQWitness] = None

    @property
    def non_optimal(self) -> bool:
        return self.status == NON_OPTIMAL


def refute_optimality(problem, sel: Selection) -> Refutation:
    """Scan the vertices of ``sup f0``; the first refuted ``y0*`` shows the
    anchor is not a local minimizer.

    Only vertices are scanned, so a consistent outcome covers vertices
    only.  Requires the selection to pass the constraint qualification.
    """
    w = check_cq(problem, sel)
    if w is None:
        raise CQNotEstablished(
            f"selection {sel.describe(problem.active)} does not satisfy the constraint qualification")
    results = []
    for y0 in problem.qd_objective.sup.canonical().vertices:
        r = check_cone_condition(problem, sel, y0)
        results.append(r)
        if not r.certified:
            return Refutation(NON_OPTIMAL, y0, tuple(results), w)
    return Refutation(CONSISTENT, None, tuple(results), w)


# -- normal-cone variant (inequalities only, polyhedral A) ---------------------------

@dataclass(frozen=True)
class NormalConeResult:
    cq_holds: bool
    status: Optional[str]
    y0_star: Vector
    certificate: Optional[KKTCertificate] = None

    @property
    def certified(self) -> bool:
        return self.status == CERTIFIED


def normal_cone(set_A, x) -> FinCone:
    x = vec(x)
    if set_A is None:
        return FinCone(len(x))
    if not set_A.contains(x):
        raise ValueError("the anchor is not in A")
    return FinCone(len(x), set_A.active_rows(x))


def normal_cone_cq(problem, z_star: Sequence[Vector]) -> bool:
    """``0 not in co{sub g_j + z_j* : j active} + N_A(anchor)``."""
    sel = Selection((), (), tuple(vec(z) for z in z_star))
    gs = shifted_inequalities(problem, sel)
    if not gs:
        return True
    N = normal_cone(problem.set_A, problem.anchor)
    groups = [("f0", [p for g in gs for p in g.canonical().vertices]),
              ("N", N.generators)]
    return _solve_inclusion(problem.n, groups) is None


def check_normal_cone_condition(problem, z_star: Sequence[Vector], y0_star) -> NormalConeResult:
    """``0 in sub f0 + y0* + sum lam_j (sub g_j + z_j*) + N_A(anchor)`` gated
    by the normal-cone constraint qualification."""
    if problem.equalities:
        raise ValueError("the normal-cone test applies to problems without equality constraints")
    sel = Selection((), (), tuple(vec(z) for z in z_star))
    validate_selection(problem, sel)
    y0 = vec(y0_star)
    N = normal_cone(problem.set_A, problem.anchor)
    if not normal_cone_cq(problem, sel.z_star):
        return NormalConeResult(False, None, y0)
    groups = [("f0", _objective_shift(problem, y0).canonical().vertices)]
    for j, g in zip(problem.active, shifted_inequalities(problem, sel)):
        groups.append((f"g{j + 1}", g.canonical().vertices))
    groups.extend((f"N{k + 1}", [a]) for k, a in enumerate(N.generators))
    combo = _solve_inclusion(problem.n, groups)
    if combo is None:
        return NormalConeResult(True, REFUTED, y0)
    return NormalConeResult(True, CERTIFIED, y0, _certificate(problem, y0, combo))


def search_normal_cone_selection(problem, budget: int = 10 ** 6):
    """First vertex choice of ``z*`` (lexicographic) passing the normal-cone CQ.

    Returns ``(z_star, checked)``; ``z_star`` is ``None`` if none passes.
    """
    lists = [q.sup.canonical().vertices for q in problem.qd_active]
    checked = 0
    for combo in itertools.product(*lists):
        if checked >= budget:
            return None, checked
        checked += 1
        if normal_cone_cq(problem, combo):
            return tuple(combo), checked
    return None, checked


__all__ = [
    "CQNotEstablished", "NotCertified", "ConeK", "build_cone_k", "cone_k_member",
    "sample_cone_rays", "polar_check", "KKTCertificate", "KKTResult", "check_cone_condition",
    "extract_multipliers", "Refutation", "refute_optimality", "NormalConeResult",
    "normal_cone", "normal_cone_cq", "check_normal_cone_condition", "search_normal_cone_selection",
    "CERTIFIED", "REFUTED", "NON_OPTIMAL", "CONSISTENT",
]
