"""Quasidifferentials of expression trees at an anchor point.

A quasidifferential of ``f`` at ``x`` is a pair ``[sub, sup]`` of polytopes
with

    f'(x; v) = max_{a in sub} <a, v> + min_{b in sup} <b, v>    for all v.

The pair is not unique: ``[sub + C, sup - C]`` represents the same
directional derivative for any polytope ``C``.  The rules below return one
deterministic representative.  After each max/min node the pair is
normalized so that a singleton side is folded into the other one (a
translation, hence equivalence-preserving); this keeps smooth pieces in
``sub`` for max-type nodes and in ``sup`` for min-type nodes.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import mpmath

from .expr import (Abs, Add, Affine, Const, Cos, Expr, Max, Min, Mul, Neg,
                   Pow, Sin, Smul, Var)
from .geometry import (Polytope, Vector, convex_hull, minkowski_sum, negate,
                       scale, support_value, translate, vec, vneg, zeros)

log = logging.getLogger(__name__)

LENIENT_TOL = 1e-12
_DPS = 50

Number = Union[Fraction, mpmath.mpf]


class ExactnessError(ArithmeticError):
    """A decision at the anchor needs a value that is only known numerically."""


class InfeasibleAnchor(ValueError):
    pass


@dataclass(frozen=True)
class PointValue:
    value: Number
    exact: bool = True


@dataclass(frozen=True)
class Quasidifferential:
    sub: Polytope
    sup: Polytope
    exact: bool = True

    def __post_init__(self):
        if self.sub.dim != self.sup.dim:
            raise ValueError("sub- and superdifferential dimensions differ")

    @property
    def dim(self) -> int:
        return self.sub.dim

    @classmethod
    def zero(cls, n: int) -> "Quasidifferential":
        z = Polytope.zero(n)
        return cls(z, z)

    @classmethod
    def smooth(cls, gradient, exact: bool = True) -> "Quasidifferential":
        g = vec(gradient)
        return cls(Polytope.point(g), Polytope.zero(len(g)), exact)

    def __add__(self, other: "Quasidifferential") -> "Quasidifferential":
        return Quasidifferential(minkowski_sum(self.sub, other.sub),
                                 minkowski_sum(self.sup, other.sup),
                                 self.exact and other.exact)

    def scaled(self, lam) -> "Quasidifferential":
        lam = Fraction(lam)
        if lam >= 0:
            return Quasidifferential(scale(self.sub, lam), scale(self.sup, lam), self.exact)
        return Quasidifferential(scale(self.sup, lam), scale(self.sub, lam), self.exact)

    def __neg__(self):
        return self.scaled(-1)

    def __str__(self):
        return f"[{self.sub}, {self.sup}]"


# -- point evaluation ----------------------------------------------------------

def _mp(x: Number) -> mpmath.mpf:
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return x


def _combine(op, a: PointValue, b: PointValue) -> PointValue:
    if a.exact and b.exact:
        return PointValue(op(a.value, b.value))
    return PointValue(op(_mp(a.value), _mp(b.value)), False)


def _check_point(e: Expr, x: Sequence[Fraction]):
    from .expr import max_var_index
    k = max_var_index(e)
    if k >= len(x):
        raise ValueError(f"expression uses x{k + 1} but the point has dimension {len(x)}")


def eval_value(e: Expr, x, exact: bool = False) -> PointValue:
    """Value of ``e`` at ``x``.

    Exact whenever every transcendental atom is evaluated at argument 0;
    otherwise a 50-digit ``mpmath`` value flagged ``exact=False``.  With
    ``exact=True`` an inexact result raises :class:`ExactnessError`.
    """
    x = vec(x)
    _check_point(e, x)
    with mpmath.workdps(_DPS):
        pv = _value(e, x)
    if exact and not pv.exact:
        raise ExactnessError(f"{e} cannot be evaluated exactly at {x}")
    return pv


def _value(e: Expr, x: Vector) -> PointValue:
    if isinstance(e, Const):
        return PointValue(e.value)
    if isinstance(e, Var):
        return PointValue(x[e.index])
    if isinstance(e, Affine):
        return PointValue(e.value(x))
    if isinstance(e, (Sin, Cos)):
        a = e.arg.value(x)
        if a == 0:
            return PointValue(Fraction(0) if isinstance(e, Sin) else Fraction(1))
        f = mpmath.sin if isinstance(e, Sin) else mpmath.cos
        return PointValue(f(_mp(a)), False)
    if isinstance(e, Pow):
        return PointValue(e.arg.value(x) ** e.k)
    if isinstance(e, Neg):
        v = _value(e.arg, x)
        return PointValue(-v.value, v.exact)
    if isinstance(e, Abs):
        v = _value(e.arg, x)
        return PointValue(abs(v.value), v.exact)
    if isinstance(e, Add):
        return _combine(lambda a, b: a + b, _value(e.left, x), _value(e.right, x))
    if isinstance(e, Mul):
        return _combine(lambda a, b: a * b, _value(e.left, x), _value(e.right, x))
    if isinstance(e, Smul):
        v = _value(e.arg, x)
        return PointValue(e.scalar * v.value if v.exact else _mp(e.scalar) * v.value, v.exact)
    if isinstance(e, (Max, Min)):
        vals = [_value(a, x) for a in e.args]
        pick = max if isinstance(e, Max) else min
        if all(v.exact for v in vals):
            return PointValue(pick(v.value for v in vals))
        return PointValue(pick(_mp(v.value) for v in vals), False)
    raise TypeError(f"unknown node {type(e).__name__}")


# -- quasidifferential rules ---------------------------------------------------

class _Rules:
    def __init__(self, x: Vector, lenient: bool):
        self.x = x
        self.n = len(x)
        self.lenient = lenient

    def inexact(self, what: str):
        if not self.lenient:
            raise ExactnessError(f"{what} at {tuple(str(c) for c in self.x)} is not exactly decidable")
        warnings.warn(f"{what} decided numerically (tolerance {LENIENT_TOL})", RuntimeWarning,
                      stacklevel=4)

    def to_fraction(self, v: PointValue, what: str) -> Fraction:
        if v.exact:
            return v.value
        self.inexact(what)
        return Fraction(float(v.value))

    def argext(self, vals: list[PointValue], pick_max: bool) -> list[int]:
        if all(v.exact for v in vals):
            best = max(v.value for v in vals) if pick_max else min(v.value for v in vals)
            return [k for k, v in enumerate(vals) if v.value == best]
        self.inexact("active-piece selection")
        fl = [float(_mp(v.value)) for v in vals]
        best = max(fl) if pick_max else min(fl)
        return [k for k, v in enumerate(fl) if abs(v - best) <= LENIENT_TOL]

    def go(self, e: Expr) -> tuple[PointValue, Quasidifferential]:
        n = self.n
        if isinstance(e, Const):
            return PointValue(e.value), Quasidifferential.zero(n)
        if isinstance(e, Var):
            g = [0] * n
            g[e.index] = 1
            return PointValue(self.x[e.index]), Quasidifferential.smooth(g)
        if isinstance(e, Affine):
            return PointValue(e.value(self.x)), Quasidifferential.smooth(e.gradient(n))
        if isinstance(e, (Sin, Cos)):
            a = e.arg.value(self.x)
            grad = e.arg.gradient(n)
            if a == 0:
                if isinstance(e, Sin):
                    return PointValue(Fraction(0)), Quasidifferential.smooth(grad)
                return PointValue(Fraction(1)), Quasidifferential.zero(n)
            with mpmath.workdps(_DPS):
                if isinstance(e, Sin):
                    val, slope = mpmath.sin(_mp(a)), mpmath.cos(_mp(a))
                else:
                    val, slope = mpmath.cos(_mp(a)), -mpmath.sin(_mp(a))
            self.inexact(f"gradient of {e}")
            s = Fraction(float(slope))
            return PointValue(val, False), Quasidifferential.smooth([s * c for c in grad], False)
        if isinstance(e, Pow):
            a = e.arg.value(self.x)
            grad = e.arg.gradient(n)
            slope = e.k * a ** (e.k - 1)
            return PointValue(a ** e.k), Quasidifferential.smooth([slope * c for c in grad])
        if isinstance(e, Neg):
            v, q = self.go(e.arg)
            return PointValue(-v.value, v.exact), _normalize(-q)
        if isinstance(e, Smul):
            v, q = self.go(e.arg)
            val = e.scalar * v.value if v.exact else _mp(e.scalar) * v.value
            return PointValue(val, v.exact), _normalize(q.scaled(e.scalar))
        if isinstance(e, Add):
            v1, q1 = self.go(e.left)
            v2, q2 = self.go(e.right)
            return _combine(lambda a, b: a + b, v1, v2), _normalize(q1 + q2)
        if isinstance(e, Mul):
            v1, q1 = self.go(e.left)
            v2, q2 = self.go(e.right)
            c1 = self.to_fraction(v1, "sign of a product factor")
            c2 = self.to_fraction(v2, "sign of a product factor")
            q = q2.scaled(c1) + q1.scaled(c2)
            return _combine(lambda a, b: a * b, v1, v2), _normalize(q)
        if isinstance(e, Abs):
            return self.go(Max((e.arg, Neg(e.arg))))
        if isinstance(e, (Max, Min)):
            parts = [self.go(a) for a in e.args]
            vals = [p[0] for p in parts]
            is_max = isinstance(e, Max)
            active = self.argext(vals, is_max)
            qs = [parts[k][1] for k in active]
            exact = all(q.exact for q in qs)
            if is_max:
                value = _value(e, self.x) if not all(v.exact for v in vals) else \
                    PointValue(max(v.value for v in vals))
                q = _max_rule(qs, exact)
            else:
                value = _value(e, self.x) if not all(v.exact for v in vals) else \
                    PointValue(min(v.value for v in vals))
                q = _min_rule(qs, exact)
            return value, q
        raise TypeError(f"unknown node {type(e).__name__}")


def _sum_polys(polys: list[Polytope], n: int) -> Polytope:
    out = Polytope.zero(n)
    for p in polys:
        out = minkowski_sum(out, p)
    return out


def _max_rule(qs: list[Quasidifferential], exact: bool) -> Quasidifferential:
    # sup = sum of sups; sub = co_k (sub_k - sum_{i != k} sup_i)
    n = qs[0].dim
    neg_sups = [negate(q.sup) for q in qs]
    pieces = []
    for k, q in enumerate(qs):
        acc = q.sub
        for i, ns in enumerate(neg_sups):
            if i != k:
                acc = minkowski_sum(acc, ns)
        pieces.extend(acc.vertices)
    sup = _sum_polys([q.sup for q in qs], n)
    return _normalize(Quasidifferential(convex_hull(pieces), sup, exact))


def _min_rule(qs: list[Quasidifferential], exact: bool) -> Quasidifferential:
    # sub = sum of subs; sup = co_k (sup_k - sum_{i != k} sub_i)
    n = qs[0].dim
    neg_subs = [negate(q.sub) for q in qs]
    pieces = []
    for k, q in enumerate(qs):
        acc = q.sup
        for i, ns in enumerate(neg_subs):
            if i != k:
                acc = minkowski_sum(acc, ns)
        pieces.extend(acc.vertices)
    sub = _sum_polys([q.sub for q in qs], n)
    q = Quasidifferential(sub, convex_hull(pieces), exact)
    s = q.sub.canonical()
    if len(s.vertices) == 1 and not q.sup.is_singleton():
        a = s.vertices[0]
        return Quasidifferential(Polytope.zero(n), translate(q.sup, a), exact)
    return _normalize(q)


def _normalize(q: Quasidifferential) -> Quasidifferential:
    """Fold a singleton superdifferential ``{b}`` into the subdifferential."""
    sub, sup = q.sub.canonical(), q.sup.canonical()
    if len(sup.vertices) == 1 and any(sup.vertices[0]):
        b = sup.vertices[0]
        return Quasidifferential(translate(sub, b), Polytope.zero(q.dim), q.exact)
    return Quasidifferential(sub, sup, q.exact)


def quasidiff(e: Expr, x, lenient: bool = False) -> Quasidifferential:
    """Quasidifferential of ``e`` at ``x``.

    Raises :class:`ExactnessError` when an activity or sign decision at
    ``x`` involves a value that is not exactly computable, unless
    ``lenient`` is set (numeric decision with tolerance ``1e-12``; the
    result is then flagged ``exact=False``).
    """
    x = vec(x)
    _check_point(e, x)
    return _Rules(x, lenient).go(e)[1]


def quasidiff_with_value(e: Expr, x, lenient: bool = False) -> tuple[PointValue, Quasidifferential]:
    x = vec(x)
    _check_point(e, x)
    return _Rules(x, lenient).go(e)


def dir_deriv(q: Quasidifferential, v) -> Fraction:
    """``max_{a in sub} <a,v> + min_{b in sup} <b,v>``."""
    v = vec(v)
    if len(v) != q.dim:
        raise ValueError(f"direction has dimension {len(v)}, expected {q.dim}")
    return support_value(q.sub, v) - support_value(negate(q.sup), v)


def qd_sum_set(q: Quasidifferential) -> Polytope:
    return minkowski_sum(q.sub, q.sup)


def shift_pair(q: Quasidifferential, C: Polytope) -> Quasidifferential:
    """The equivalent pair ``[sub + C, sup - C]``."""
    return Quasidifferential(minkowski_sum(q.sub, C), minkowski_sum(q.sup, negate(C)), q.exact)


def active_set(problem) -> tuple[int, ...]:
    """Indices (0-based) of inequality constraints with ``g_j(anchor) = 0``.

    Raises :class:`InfeasibleAnchor` if some ``g_j(anchor) > 0`` or
    ``f_i(anchor) != 0``, and :class:`ExactnessError` if a value is only
    known numerically (unless the problem is lenient).
    """
    x = problem.anchor
    lenient = getattr(problem, "lenient", False)

    def value(e, what):
        pv = eval_value(e, x)
        if pv.exact:
            return pv.value
        if not lenient:
            raise ExactnessError(f"{what} is not exactly computable at the anchor")
        v = float(pv.value)
        return Fraction(0) if abs(v) <= LENIENT_TOL else Fraction(v)

    for i, f in enumerate(problem.equalities):
        if value(f, f"equality {i + 1}") != 0:
            raise InfeasibleAnchor(f"anchor infeasible (equality {i + 1})")
    active = []
    for j, g in enumerate(problem.inequalities):
        v = value(g, f"inequality {j + 1}")
        if v > 0:
            raise InfeasibleAnchor(f"anchor infeasible (inequality {j + 1})")
        if v == 0:
            active.append(j)
    return tuple(active)


__all__ = [
    "ExactnessError", "InfeasibleAnchor", "PointValue", "Quasidifferential",
    "eval_value", "quasidiff", "quasidiff_with_value", "dir_deriv", "qd_sum_set",
    "shift_pair", "active_set", "vneg", "zeros",
]
