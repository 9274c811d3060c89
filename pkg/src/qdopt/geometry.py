"""Polytopes and finitely generated cones over exact rationals.

Polytopes are kept in V-representation.  Every set-level decision
(membership, disjointness from a cone, meeting a linear subspace) is a
feasibility question answered by :mod:`qdopt.lp`.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .lp import LpProblem, feasible, solve

Vector = tuple[Fraction, ...]


class DimensionError(ValueError):
    pass


def vec(xs: Iterable) -> Vector:
    """Coerce an iterable of ints, strings or fractions to a rational vector."""
    return tuple(x if isinstance(x, Fraction) else Fraction(x) for x in xs)


def dot(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def vadd(a: Vector, b: Vector) -> Vector:
    return tuple(x + y for x, y in zip(a, b))


def vneg(a: Vector) -> Vector:
    return tuple(-x for x in a)


def vscale(a: Vector, lam: Fraction) -> Vector:
    return tuple(lam * x for x in a)


def zeros(n: int) -> Vector:
    return (Fraction(0),) * n


def _check_dim(n: int, v: Sequence, what: str = "vector"):
    if len(v) != n:
        raise DimensionError(f"{what} has dimension {len(v)}, expected {n}")


@dataclass(frozen=True)
class Polytope:
    """Convex hull of a nonempty finite point list.

    Redundant points are allowed; :meth:`canonical` (or
    :func:`canonicalize`) reduces the list to the sorted extreme points.
    """

    vertices: tuple[Vector, ...]

    def __post_init__(self):
        verts = tuple(vec(p) for p in self.vertices)
        if not verts:
            raise ValueError("a polytope needs at least one point")
        n = len(verts[0])
        for p in verts:
            _check_dim(n, p, "vertex")
        object.__setattr__(self, "vertices", verts)

    @property
    def dim(self) -> int:
        return len(self.vertices[0])

    @classmethod
    def point(cls, p) -> "Polytope":
        return cls((vec(p),))

    @classmethod
    def zero(cls, n: int) -> "Polytope":
        return cls((zeros(n),))

    def canonical(self) -> "Polytope":
        return canonicalize(self)

    def is_singleton(self) -> bool:
        return len(self.canonical().vertices) == 1

    def __add__(self, other: "Polytope") -> "Polytope":
        return minkowski_sum(self, other)

    def __neg__(self) -> "Polytope":
        return negate(self)

    def __sub__(self, other: "Polytope") -> "Polytope":
        return minkowski_sum(self, negate(other))

    def __contains__(self, x) -> bool:
        return member(self, x)

    def __str__(self):
        return "co{" + ", ".join(fmt_vector(p) for p in self.vertices) + "}"


@dataclass(frozen=True)
class FinCone:
    """Convex cone spanned by finitely many generators; no generators is {0}."""

    dim: int
    generators: tuple[Vector, ...] = ()

    def __post_init__(self):
        gens = tuple(vec(g) for g in self.generators)
        for g in gens:
            _check_dim(self.dim, g, "generator")
        object.__setattr__(self, "generators", gens)

    def negated(self) -> "FinCone":
        return FinCone(self.dim, tuple(vneg(g) for g in self.generators))

    def __contains__(self, x) -> bool:
        return cone_member(self, x)


@dataclass(frozen=True)
class MaxFace:
    value: Fraction
    face_vertices: tuple[Vector, ...]


def fmt_vector(v: Sequence[Fraction]) -> str:
    return "(" + ", ".join(str(x) for x in v) + ")"


# -- support function and set arithmetic ------------------------------------

def support(P: Polytope, v) -> MaxFace:
    v = vec(v)
    _check_dim(P.dim, v, "direction")
    vals = [dot(p, v) for p in P.vertices]
    best = max(vals)
    face = tuple(p for p, s in zip(P.vertices, vals) if s == best)
    return MaxFace(best, tuple(dict.fromkeys(face)))


def support_value(P: Polytope, v) -> Fraction:
    return max(dot(p, v) for p in P.vertices)


def minkowski_sum(P: Polytope, Q: Polytope) -> Polytope:
    if P.dim != Q.dim:
        raise DimensionError(f"cannot add polytopes of dimension {P.dim} and {Q.dim}")
    P, Q = P.canonical(), Q.canonical()
    return canonicalize(Polytope(tuple(vadd(p, q) for p in P.vertices for q in Q.vertices)))


def scale(P: Polytope, lam) -> Polytope:
    lam = Fraction(lam)
    if lam == 0:
        return Polytope.zero(P.dim)
    return canonicalize(Polytope(tuple(vscale(p, lam) for p in P.vertices)))


def negate(P: Polytope) -> Polytope:
    return scale(P, -1)


def translate(P: Polytope, t) -> Polytope:
    t = vec(t)
    _check_dim(P.dim, t, "translation")
    return canonicalize(Polytope(tuple(vadd(p, t) for p in P.vertices)))


def convex_hull(points: Iterable) -> Polytope:
    pts = tuple(vec(p) for p in points)
    if not pts:
        raise ValueError("convex hull of an empty point list")
    return canonicalize(Polytope(pts))


def _in_hull(x: Vector, pts: Sequence[Vector]) -> bool:
    """Is ``x`` a convex combination of ``pts``?"""
    n = len(x)
    k = len(pts)
    eq = [(tuple(p[d] for p in pts), x[d]) for d in range(n)]
    eq.append(((Fraction(1),) * k, Fraction(1)))
    return feasible(eq_rows=eq, n_vars=k) is not None


# Fixed probe directions; a unique maximizer of any linear functional is an
# extreme point, which spares the LP for most vertices.
def _probe_directions(n: int):
    for d in range(n):
        e = [0] * n
        e[d] = 1
        yield tuple(e)
        e[d] = -1
        yield tuple(e)
    if n > 1:
        yield tuple(range(1, n + 1))
        yield tuple(-k for k in range(1, n + 1))
        yield tuple(1 if d % 2 == 0 else -1 for d in range(n))
        yield tuple(-1 if d % 2 == 0 else 1 for d in range(n))


_canonical_cache: dict = {}


def canonicalize(P: Polytope) -> Polytope:
    """Extreme points of ``P``, deduplicated and sorted lexicographically."""
    cached = _canonical_cache.get(P.vertices)
    if cached is not None:
        return cached
    pts = sorted(set(P.vertices))
    n = P.dim
    if len(pts) <= 2:
        out = Polytope(tuple(pts))
    elif n == 1:
        out = Polytope((pts[0], pts[-1]))
    else:
        known = set()
        for d in _probe_directions(n):
            vals = [dot(p, d) for p in pts]
            best = max(vals)
            arg = [p for p, s in zip(pts, vals) if s == best]
            if len(arg) == 1:
                known.add(arg[0])
        kept = list(pts)
        for p in pts:
            if p in known:
                continue
            others = [q for q in kept if q != p]
            if _in_hull(p, others):
                kept = others
        out = Polytope(tuple(kept))
    if len(_canonical_cache) > 50000:
        _canonical_cache.clear()
    _canonical_cache[P.vertices] = out
    _canonical_cache[out.vertices] = out
    return out


# -- cones -------------------------------------------------------------------

def cone_hull(sets: Iterable[Union[Polytope, Sequence]], dim: int) -> FinCone:
    """Cone generated by the union of the given polytopes / point lists."""
    gens = []
    for s in sets:
        if isinstance(s, Polytope):
            _check_dim(dim, s.vertices[0], "polytope")
            gens.extend(s.canonical().vertices)
        else:
            gens.extend(vec(p) for p in s)
    return FinCone(dim, tuple(sorted(set(gens))))


# -- LP-backed decisions -----------------------------------------------------

def member(P: Polytope, x) -> bool:
    x = vec(x)
    _check_dim(P.dim, x, "point")
    return _in_hull(x, P.vertices)


def cone_member(K: FinCone, x) -> bool:
    x = vec(x)
    _check_dim(K.dim, x, "point")
    if not K.generators:
        return all(c == 0 for c in x)
    eq = [(tuple(g[d] for g in K.generators), x[d]) for d in range(K.dim)]
    return feasible(eq_rows=eq, n_vars=len(K.generators)) is not None


def polytope_cone_disjoint(P: Polytope, K: FinCone) -> bool:
    """True iff ``P`` and ``K`` have no common point."""
    if P.dim != K.dim:
        raise DimensionError("polytope and cone dimensions differ")
    verts = P.vertices
    k, m = len(verts), len(K.generators)
    eq = []
    for d in range(P.dim):
        eq.append((tuple(p[d] for p in verts) + tuple(-g[d] for g in K.generators),
                   Fraction(0)))
    eq.append(((Fraction(1),) * k + (Fraction(0),) * m, Fraction(1)))
    return feasible(eq_rows=eq, n_vars=k + m) is None


def subspace_intersects(P: Polytope, span_of: Sequence) -> bool:
    """True iff ``P`` meets the linear span of ``span_of``."""
    span = [vec(s) for s in span_of]
    for s in span:
        _check_dim(P.dim, s, "spanning vector")
    verts = P.vertices
    k, m = len(verts), len(span)
    eq = []
    for d in range(P.dim):
        eq.append((tuple(p[d] for p in verts) + tuple(-s[d] for s in span),
                   Fraction(0)))
    eq.append(((Fraction(1),) * k + (Fraction(0),) * m, Fraction(1)))
    bounds = [(0, None)] * k + [(None, None)] * m
    return feasible(eq_rows=eq, bounds=bounds, n_vars=k + m) is not None


def general_position_at(v, A: Polytope, B: Polytope) -> bool:
    """Per-direction general-position probe: is the max-face of ``B`` at
    ``v`` *not* contained in the max-face of ``A`` at ``v``?"""
    face_b = support(B, v).face_vertices
    face_a = Polytope(support(A, v).face_vertices)
    return any(not member(face_a, b) for b in face_b)


def max_face_singleton(P: Polytope, v) -> bool:
    return len(support(P.canonical(), v).face_vertices) == 1


def maximize_over(P_rows: Sequence, c, box: Fraction = Fraction(1)):
    """Maximize ``c.v`` over ``{v : a.v <= 0 for a in P_rows, |v_k| <= box}``.

    Returns the optimal vertex; used to sample rays of polyhedral cones.
    """
    c = vec(c)
    n = len(c)
    le = [(vec(a), Fraction(0)) for a in P_rows]
    res = solve(LpProblem(n, c, (), tuple(le), tuple((-box, box) for _ in range(n))))
    return res.point


def nullspace(rows: Sequence, n: int) -> list[Vector]:
    """Exact basis of ``{v : <a, v> = 0 for a in rows}`` by Gauss-Jordan elimination."""
    mat = [list(vec(r)) for r in rows]
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        lead = mat[r][c]
        mat[r] = [a / lead for a in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    basis = []
    for free in (c for c in range(n) if c not in pivots):
        v = [Fraction(0)] * n
        v[free] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -mat[i][free]
        basis.append(tuple(v))
    return basis
