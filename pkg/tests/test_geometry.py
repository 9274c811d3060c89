import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from qdopt.geometry import (DimensionError, FinCone, Polytope, canonicalize, cone_hull,
                            cone_member, convex_hull, general_position_at,
                            max_face_singleton, member, minkowski_sum, negate,
                            nullspace, polytope_cone_disjoint, scale,
                            subspace_intersects, support, support_value, translate)

F = Fraction
SQUARE = Polytope(((1, 1), (1, -1), (-1, 1), (-1, -1)))


def vs(P):
    return set(P.canonical().vertices)


def pts(*ps):
    return {tuple(F(c) for c in p) for p in ps}


# -- worked values ------------------------------------------------------------------------

def test_support_shifted_subdifferential():
    f = support(Polytope(((1, -1), (-1, -1))), (-1, 1))
    assert f.value == 0


def test_support_singleton():
    f = support(Polytope.point((3, -2)), (5, 7))
    assert f.value == 1 and f.face_vertices == ((3, -2),)


def test_support_square():
    f = support(SQUARE, (1, 2))
    assert f.value == 3 and set(f.face_vertices) == pts((1, 1))


def test_minkowski_cross_is_square():
    S = minkowski_sum(Polytope(((1, 0), (-1, 0))), Polytope(((0, 1), (0, -1))))
    assert vs(S) == vs(SQUARE)


def test_minkowski_identity_and_corners():
    P = Polytope(((0, 0), (1, 0)))
    assert vs(P + Polytope.zero(2)) == vs(P)
    assert vs(P + Polytope(((0, 0), (0, 1)))) == pts((0, 0), (1, 0), (0, 1), (1, 1))


def test_scale_negate_translate():
    assert vs(scale(Polytope(((2, 0), (0, 2))), F(1, 2))) == pts((1, 0), (0, 1))
    assert vs(negate(Polytope(((0, 0), (-1, -1))))) == pts((0, 0), (1, 1))
    assert vs(translate(Polytope(((1, 0), (-1, 0))), (0, 1))) == pts((1, 1), (-1, 1))


def test_convex_hull_drops_interior():
    assert vs(convex_hull([(0, 0), (1, 0), (F(1, 2), 0)])) == pts((0, 0), (1, 0))
    assert vs(convex_hull(list(SQUARE.vertices) + [(0, 0)])) == vs(SQUARE)
    assert vs(convex_hull([(2, 0), (0, 2), (1, 1)])) == pts((2, 0), (0, 2))
    with pytest.raises(ValueError):
        convex_hull([])


def test_canonical_is_sorted():
    P = canonicalize(Polytope(((1, 1), (-1, -1), (0, 0), (1, -1), (-1, 1))))
    assert list(P.vertices) == sorted(P.vertices)


def test_cone_hull():
    K = cone_hull([Polytope(((1, -1), (-1, -1))), Polytope(((1, 1),))], 2)
    assert set(K.generators) == pts((1, -1), (-1, -1), (1, 1))
    assert cone_hull([], 2).generators == ()
    Q = cone_hull([Polytope(((1, 0),)), Polytope(((0, 1),))], 2)
    assert set(Q.generators) == pts((1, 0), (0, 1))


def test_membership():
    seg = Polytope(((2, 0), (0, 2)))
    assert member(seg, (1, 1))
    assert not member(seg + Polytope.zero(2), (0, 0))
    assert cone_member(FinCone(2), (0, 0))
    assert not cone_member(FinCone(2), (1, 0))


def test_polytope_cone_disjoint():
    P = Polytope(((1, 1), (-1, 1)))
    assert not polytope_cone_disjoint(P, FinCone(2, ((-1, 1),)))
    assert polytope_cone_disjoint(Polytope(((1, 0),)), FinCone(2))
    assert polytope_cone_disjoint(Polytope(((1, 0), (0, 1))), FinCone(2, ((-1, 0), (0, -1))))


def test_subspace_intersects():
    assert subspace_intersects(SQUARE, SQUARE.vertices)
    assert not subspace_intersects(Polytope(((1, 0),)), [])
    assert subspace_intersects(Polytope.zero(2), [(1, 5)])


def test_general_position():
    A = Polytope(((2, 0), (0, 2)))
    B = Polytope(((0, 0), (1, 1)))
    assert general_position_at((1, 1), A, B) is False
    assert general_position_at((0, 0), Polytope(((0, 0), (1, 1))), Polytope(((5, 5),))) is True
    for v in [(0, 0), (1, 0), (3, -2)]:
        assert general_position_at(v, A, A) is False


def test_max_face_singleton():
    P = Polytope(((0, 1), (0, -1), (-2, 1), (-2, -1)))
    assert max_face_singleton(P, (1, 0)) is False
    assert max_face_singleton(Polytope(((4, 4),)), (1, 7))
    assert max_face_singleton(SQUARE, (1, 2))


def test_dimension_errors():
    with pytest.raises(DimensionError):
        Polytope(((1, 0), (1,)))
    with pytest.raises(DimensionError):
        support(SQUARE, (1, 2, 3))


def test_nullspace():
    ns = nullspace([(1, 1, 0)], 3)
    assert len(ns) == 2
    assert all(sum(a * b for a, b in zip((1, 1, 0), v)) == 0 for v in ns)
    assert nullspace([(1, 0), (0, 1)], 2) == []


# -- properties ----------------------------------------------------------------------------

small = st.fractions(min_value=-3, max_value=3, max_denominator=4)


def vectors(n):
    return st.tuples(*[small] * n)


def polytopes(n, max_size=5):
    return st.lists(vectors(n), min_size=1, max_size=max_size).map(lambda ps: Polytope(tuple(ps)))


@given(polytopes(2), vectors(2), vectors(2), st.fractions(min_value=0, max_value=5))
def test_support_sublinear(P, v, w, lam):
    vw = tuple(a + b for a, b in zip(v, w))
    assert support_value(P, vw) <= support_value(P, v) + support_value(P, w)
    assert support_value(P, tuple(lam * a for a in v)) == lam * support_value(P, v)


@given(polytopes(3, 4), polytopes(3, 4), vectors(3))
def test_support_sum_law(P, Q, v):
    assert support_value(P + Q, v) == support_value(P, v) + support_value(Q, v)


@given(polytopes(2), vectors(2))
def test_canonical_preserves_membership(P, x):
    assert member(P, x) == member(canonicalize(P), x)
    for p in P.vertices:
        assert member(canonicalize(P), p)


@given(polytopes(3, 4))
def test_disjoint_from_trivial_cone(P):
    assert polytope_cone_disjoint(P, FinCone(3)) == (not member(P, (0, 0, 0)))


def _in_triangle(x, a, b, c):
    """Exact barycentric test, degenerate triangles handled as segments."""
    det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
    if det == 0:
        return any(_on_segment(x, p, q) for p, q in ((a, b), (b, c), (a, c)))
    l1 = ((b[0] - x[0]) * (c[1] - x[1]) - (c[0] - x[0]) * (b[1] - x[1])) / det
    l2 = ((c[0] - x[0]) * (a[1] - x[1]) - (a[0] - x[0]) * (c[1] - x[1])) / det
    return l1 >= 0 and l2 >= 0 and 1 - l1 - l2 >= 0


def _on_segment(x, p, q):
    cross = (q[0] - p[0]) * (x[1] - p[1]) - (q[1] - p[1]) * (x[0] - p[0])
    if cross != 0:
        return False
    return min(p[0], q[0]) <= x[0] <= max(p[0], q[0]) and min(p[1], q[1]) <= x[1] <= max(p[1], q[1])


def _brute_member(verts, x):
    # Caratheodory: in the plane, x is in the hull iff it is in some triangle of vertices
    if len(verts) == 1:
        return tuple(verts[0]) == tuple(x)
    trip = itertools.combinations_with_replacement(verts, 3)
    return any(_in_triangle(x, a, b, c) for a, b, c in trip)


@settings(max_examples=25)
@given(st.lists(st.tuples(st.integers(-2, 2), st.integers(-2, 2)), min_size=1, max_size=5))
def test_member_matches_brute_force(verts):
    P = Polytope(tuple(verts))
    grid = [(F(i, 2), F(j, 2)) for i in range(-5, 6) for j in range(-5, 6)]
    for x in grid:
        assert member(P, x) == _brute_member([tuple(map(F, v)) for v in verts], x)
