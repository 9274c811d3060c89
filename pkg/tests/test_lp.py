import itertools
import random
from fractions import Fraction

import pytest

from qdopt.lp import (INFEASIBLE, OPTIMAL, UNBOUNDED, LpProblem, LpShapeError,
                      feasible, solve)


def test_box_maximum():
    r = solve(LpProblem(1, (1,), le_rows=(((1,), 1),)))
    assert r.status == OPTIMAL and r.point == (1,) and r.value == 1


def test_unbounded():
    assert solve(LpProblem(1, (1,))).status == UNBOUNDED


def test_infeasible_bounds():
    r = solve(LpProblem(1, (0,), le_rows=(((-1,), -1), ((1,), 0)), bounds=((None, None),)))
    assert r.status == INFEASIBLE


def test_feasible_simplex():
    x = feasible(eq_rows=[((1, 1), 1)], n_vars=2)
    assert x is not None and x[0] + x[1] == 1 and min(x) >= 0


def test_contradictory_equalities():
    assert feasible(eq_rows=[((1,), 1), ((1,), 2)], bounds=[(None, None)]) is None


def test_segment_misses_origin():
    # alpha (2,0) + beta (0,2) = 0 with alpha + beta = 1 has no nonnegative solution;
    # parametrically the segment is (2s, 2 - 2s), which is never the origin
    assert all((2 * s, 2 - 2 * s) != (0, 0) for s in (Fraction(k, 100) for k in range(101)))
    rows = [((2, 0), 0), ((0, 2), 0), ((1, 1), 1)]
    assert feasible(eq_rows=rows) is None


def test_shape_error():
    with pytest.raises(LpShapeError):
        LpProblem(2, (1,))
    with pytest.raises(LpShapeError):
        LpProblem(1, (1,), le_rows=(((1, 2), 0),))


def test_free_and_upper_bounds():
    r = solve(LpProblem(2, (-1, -1), le_rows=(((-1, -1), 3),), bounds=((None, 5), (-7, None))))
    assert r.status == OPTIMAL and r.value == 3


def test_deterministic():
    p = LpProblem(3, (1, 1, 1), le_rows=(((1, 1, 0), 1), ((0, 1, 1), 1), ((1, 0, 1), 1)))
    assert solve(p) == solve(p)


# -- independent oracle: enumerate basic solutions ---------------------------------------

def _solve_square(A, b):
    """Gauss-Jordan on Fractions; ``None`` if singular."""
    n = len(A)
    M = [list(map(Fraction, row)) + [Fraction(rhs)] for row, rhs in zip(A, b)]
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            return None
        M[c], M[piv] = M[piv], M[c]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c] / M[c][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    return tuple(M[r][n] / M[r][r] for r in range(n))


def _vertices(n, eqs, les):
    """All basic feasible points of ``eqs`` = , ``les`` <= (bounds folded into les)."""
    cands = [(tuple(a), b) for a, b in eqs] + [(tuple(a), b) for a, b in les]
    out = set()
    for combo in itertools.combinations(range(len(cands)), n):
        if not all(e in combo for e in range(len(eqs))):
            continue
        x = _solve_square([cands[k][0] for k in combo], [cands[k][1] for k in combo])
        if x is None:
            continue
        if all(sum(a * xi for a, xi in zip(r, x)) == b for r, b in eqs) and \
                all(sum(a * xi for a, xi in zip(r, x)) <= b for r, b in les):
            out.add(x)
    return out


def _oracle(n, c, eqs, les):
    nonneg = [(tuple(-1 if k == j else 0 for k in range(n)), 0) for j in range(n)]
    verts = _vertices(n, eqs, list(les) + nonneg)
    if not verts:
        return INFEASIBLE, None
    box = [(tuple(1 if k == j else 0 for k in range(n)), 1) for j in range(n)]
    rec = _vertices(n, [(a, 0) for a, _ in eqs], [(a, 0) for a, _ in les] + nonneg + box)
    if any(sum(ci * di for ci, di in zip(c, d)) > 0 for d in rec):
        return UNBOUNDED, None
    return OPTIMAL, max(sum(ci * xi for ci, xi in zip(c, x)) for x in verts)


def _random_lp(rng):
    n = rng.randint(1, 3)
    def row():
        return tuple(rng.randint(-3, 3) for _ in range(n))
    les = [(row(), rng.randint(-2, 4)) for _ in range(rng.randint(0, 6 - (n > 2)))]
    eqs = [(row(), rng.randint(-2, 3)) for _ in range(rng.randint(0, 1))]
    eqs = [(a, b) for a, b in eqs if any(a)]
    return n, row(), eqs, les


def test_vertex_enumeration_oracle():
    rng = random.Random(7)
    seen = {OPTIMAL: 0, INFEASIBLE: 0, UNBOUNDED: 0}
    for _ in range(100):
        n, c, eqs, les = _random_lp(rng)
        res = solve(LpProblem(n, c, tuple(eqs), tuple(les)))
        status, value = _oracle(n, c, eqs, les)
        assert res.status == status, (n, c, eqs, les)
        seen[status] += 1
        if status == OPTIMAL:
            assert res.value == value
            x = res.point
            assert all(xi >= 0 for xi in x)
            assert all(sum(a * xi for a, xi in zip(r, x)) == b for r, b in eqs)
            assert all(sum(a * xi for a, xi in zip(r, x)) <= b for r, b in les)
            assert sum(ci * xi for ci, xi in zip(c, x)) == res.value
    assert all(seen.values()), seen
