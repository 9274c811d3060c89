"""Floating-point cross-checks that do not share code paths with the exact modules.

Everything here evaluates expressions in double precision: finite-difference
slopes, distance-to-feasible-set estimates along rays, and a search for
strictly better feasible points near the anchor.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .calculus import ExactnessError, dir_deriv, eval_value
from .expr import Expr, eval_float
from .geometry import Vector, vec


@dataclass(frozen=True)
class SamplingConfig:
    steps: tuple[float, ...] = (1e-3, 1e-4, 1e-5)
    grid: int = 360
    radius: float = 0.5
    samples: int = 200
    seed: int = 0
    tol: float = 1e-9
    cone_tol: float = 1e-3

    def __post_init__(self):
        if not self.steps or any(s <= 0 for s in self.steps):
            raise ValueError("steps must be positive")
        if any(b >= a for a, b in zip(self.steps, self.steps[1:])):
            raise ValueError("steps must be strictly decreasing")

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def _f(e: Expr, X) -> np.ndarray:
    return eval_float(e, X)


# -- finite differences ---------------------------------------------------------

@dataclass(frozen=True)
class FdEstimate:
    estimate: float
    ladder: tuple[float, ...]
    converged: bool


def fd_dir_deriv(e: Expr, x, v, cfg: SamplingConfig = SamplingConfig()) -> FdEstimate:
    """Forward-difference slopes ``(f(x + t v) - f(x)) / t`` along the step
    ladder, with one Richardson step at the finest ``t`` to cancel the
    first-order error."""
    x = np.asarray([float(c) for c in x])
    v = np.asarray([float(c) for c in v])
    f0 = float(_f(e, x))
    def slope(t):
        return (float(_f(e, x + t * v)) - f0) / t
    ladder = tuple(slope(t) for t in cfg.steps)
    t = cfg.steps[-1]
    est = 2.0 * slope(t / 2) - ladder[-1]
    gaps = [abs(a - b) for a, b in zip(ladder, ladder[1:])]
    converged = all(b <= a + 1e-12 for a, b in zip(gaps, gaps[1:])) if len(gaps) > 1 else True
    return FdEstimate(est, ladder, converged)


# -- feasibility and distance to M ---------------------------------------------------

class _FloatProblem:
    def __init__(self, problem):
        self.p = problem
        self.n = problem.n
        self.anchor = np.asarray([float(c) for c in problem.anchor])
        if problem.set_A is not None and problem.set_A.rows:
            self.A = np.asarray([[float(c) for c in a] for a, _ in problem.set_A.rows])
            self.b = np.asarray([float(b) for _, b in problem.set_A.rows])
        else:
            self.A = None

    def ineq_ok(self, X, tol=0.0) -> np.ndarray:
        ok = np.ones(X.shape[:-1], dtype=bool)
        for g in self.p.inequalities:
            ok &= _f(g, X) <= tol
        if self.A is not None:
            ok &= np.all(X @ self.A.T <= self.b + tol, axis=-1)
        return ok

    def eq_residual(self, X) -> np.ndarray:
        r = np.zeros(X.shape[:-1])
        for f in self.p.equalities:
            r = np.maximum(r, np.abs(_f(f, X)))
        return r

    def feasible(self, X, tol=0.0) -> np.ndarray:
        return self.ineq_ok(X, tol) & (self.eq_residual(X) <= tol)


def _directions(n: int, cfg: SamplingConfig) -> np.ndarray:
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        th = np.linspace(0.0, 2 * np.pi, cfg.grid, endpoint=False)
        return np.stack([np.cos(th), np.sin(th)], axis=1)
    rng = cfg.rng()
    U = rng.normal(size=(cfg.samples, n))
    U = np.concatenate([U, np.eye(n), -np.eye(n)])
    return U / np.linalg.norm(U, axis=1, keepdims=True)


def _ray_distance(fp: _FloatProblem, P: np.ndarray, U: np.ndarray, smax: float) -> float:
    """Smallest ``s <= smax`` found with ``P + s u`` (nearly) in ``M``.

    Without equalities the first feasible grid point on each ray is
    refined by bisection against the last infeasible one.  With one or
    more equalities, a sign change of the first equality along a ray is
    bisected to a root, accepted when the other constraints hold there.
    """
    s = np.unique(np.concatenate([smax * np.geomspace(1e-7, 1.0, 60),
                                  smax * np.linspace(0.0, 1.0, 401)[1:]]))
    X = P[None, None, :] + s[None, :, None] * U[:, None, :]
    best = np.inf
    eqs = fp.p.equalities
    if not eqs:
        ok = fp.feasible(X)
        for k in range(U.shape[0]):
            idx = np.flatnonzero(ok[k])
            if idx.size == 0:
                continue
            i = idx[0]
            hi = s[i]
            lo = s[i - 1] if i > 0 else 0.0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if fp.feasible(P + mid * U[k]):
                    hi = mid
                else:
                    lo = mid
            best = min(best, hi)
        return best
    f1 = eqs[0]
    F = _f(f1, X)
    F0 = float(_f(f1, P))
    for k in range(U.shape[0]):
        row = F[k]
        prev_s, prev_v = 0.0, F0
        for i in range(len(s)):
            cur = row[i]
            if cur == 0.0 or np.sign(cur) != np.sign(prev_v):
                lo, hi, flo = prev_s, s[i], prev_v
                if cur != 0.0:
                    for _ in range(80):
                        mid = 0.5 * (lo + hi)
                        fm = float(_f(f1, P + mid * U[k]))
                        if fm == 0.0:
                            lo = hi = mid
                            break
                        if np.sign(fm) == np.sign(flo):
                            lo, flo = mid, fm
                        else:
                            hi = mid
                root = P + hi * U[k]
                scale = max(1.0, smax) * 1e-12
                if fp.ineq_ok(root, scale) and fp.eq_residual(root) <= max(scale, 1e-13):
                    best = min(best, hi)
                    break
            prev_s, prev_v = s[i], cur
            if s[i] >= best:
                break
    return best


@dataclass(frozen=True)
class ContingentScore:
    alphas: tuple[float, ...]
    scores: tuple[float, ...]
    score: float
    member: bool


def contingent_membership(problem, x, v, cfg: SamplingConfig = SamplingConfig()) -> ContingentScore:
    """Estimate ``d(x + alpha v, M) / alpha`` for each ``alpha`` in the step ladder.

    The distance estimate is the length of the shortest ray segment found
    from ``x + alpha v`` to a point of ``M``, so it bounds the true distance
    from above: small scores are trustworthy, large ones are advisory.
    """
    fp = _FloatProblem(problem)
    x = np.asarray([float(c) for c in x])
    v = np.asarray([float(c) for c in v])
    nv = float(np.linalg.norm(v))
    U = _directions(problem.n, cfg)
    scores = []
    for a in cfg.steps:
        P = x + a * v
        if nv == 0.0 or fp.feasible(P[None, :])[0]:
            scores.append(0.0)
            continue
        smax = a * nv
        toward = (x - P) / smax
        d = _ray_distance(fp, P, np.concatenate([toward[None, :], U]), smax)
        scores.append(float(min(d, smax) / a))
    return ContingentScore(tuple(cfg.steps), tuple(scores), scores[-1],
                           bool(scores[-1] < cfg.cone_tol))


# -- local improvement --------------------------------------------------------------

@dataclass(frozen=True)
class Better:
    point: Vector
    value: Fraction | float
    exact: bool


def _exact_check(problem, y: Vector, f0: Fraction) -> Optional[tuple[Fraction, bool]]:
    """Exact re-verification; ``None`` if ``y`` fails, else ``(value, exact)``."""
    try:
        vals = {}
        for label, e in problem.functions():
            vals[label] = eval_value(e, y, exact=True).value
    except ExactnessError:
        return None
    for label, val in vals.items():
        if label.startswith("g") and val > 0:
            return None
        if label.startswith("f") and label != "f0" and val != 0:
            return None
    if problem.set_A is not None and not problem.set_A.contains(y):
        return None
    return (vals["f0"], True) if vals["f0"] < f0 else None


def local_improvement(problem, x=None, cfg: SamplingConfig = SamplingConfig(),
                      directions: Optional[Sequence] = None) -> Optional[Better]:
    """Search rays ``x + s u`` (small integer ``u``, dyadic ``s``) for a
    feasible point with a strictly smaller objective.

    Candidates are rational, so whenever every function is exactly
    evaluable there the verdict is rechecked in exact arithmetic; a
    candidate that passes only in floating point is returned with
    ``exact=False``.  ``directions`` replaces the default ray set.
    """
    x = problem.anchor if x is None else vec(x)
    n = problem.n
    fp = _FloatProblem(problem)
    f0_exact = eval_value(problem.objective, x)
    f0_float = float(f0_exact.value)
    rng = cfg.rng()
    if directions is not None:
        dirs = [vec(u) for u in directions]
    else:
        dirs = [u for u in itertools.product(range(-2, 3), repeat=n)] if n <= 3 else []
        dirs += [tuple(int(c) for c in rng.integers(-5, 6, size=n)) for _ in range(cfg.samples)]
    dirs = [u for u in dict.fromkeys(dirs) if any(u)]
    steps = [Fraction(cfg.radius).limit_denominator(1 << 20) / (1 << k) for k in range(24)]
    cand = [tuple(xi + s * ui for xi, ui in zip(x, u)) for u in dirs for s in steps]
    X = np.asarray([[float(c) for c in y] for y in cand])
    ok = fp.feasible(X, cfg.tol) & (_f(problem.objective, X) < f0_float)
    fallback = None
    for k in np.flatnonzero(ok):
        y = cand[k]
        if f0_exact.exact:
            checked = _exact_check(problem, y, f0_exact.value)
            if checked is not None:
                return Better(y, checked[0], True)
        if fallback is None:
            fallback = Better(y, float(_f(problem.objective, X[k])), False)
    return fallback


# -- sign pattern of directional derivatives --------------------------------------------

@dataclass(frozen=True)
class SignCheck:
    direction: str
    function: str
    value: Fraction
    expected: str
    passed: bool


def _sign_ok(value: Fraction, expected: str) -> bool:
    return {"<0": value < 0, ">0": value > 0, "=0": value == 0}[expected]


def check_dd_witness_signs(problem, v_list: Sequence, w_list: Sequence, v0) -> list[SignCheck]:
    """Exact directional-derivative signs of the CQ witness directions:
    ``f_i'(v_i) < 0``, ``f_i'(w_i) > 0``, ``f_k' = 0`` on the others,
    ``g_j'(v0) < 0`` for active ``j`` and ``f_i'(v0) = 0``."""
    out = []
    qf = problem.qd_equalities
    for tag, dirs, sign in (("v", v_list, "<0"), ("w", w_list, ">0")):
        for i, d in enumerate(dirs):
            for k, q in enumerate(qf):
                val = dir_deriv(q, d)
                exp = sign if k == i else "=0"
                out.append(SignCheck(f"{tag}{i + 1}", f"f{k + 1}", val, exp, _sign_ok(val, exp)))
    for j, q in zip(problem.active, problem.qd_active):
        val = dir_deriv(q, v0)
        out.append(SignCheck("v0", f"g{j + 1}", val, "<0", _sign_ok(val, "<0")))
    for k, q in enumerate(qf):
        val = dir_deriv(q, v0)
        out.append(SignCheck("v0", f"f{k + 1}", val, "=0", _sign_ok(val, "=0")))
    return out


__all__ = [
    "SamplingConfig", "FdEstimate", "fd_dir_deriv", "ContingentScore", "contingent_membership",
    "Better", "local_improvement", "SignCheck", "check_dd_witness_signs",
]
