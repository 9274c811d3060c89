"""End-to-end acceptance checks, one test per criterion.

Each test records a ``criterion N: PASS/FAIL`` line; the lines are printed
as they happen and again in the pytest terminal summary.  Run directly with
``python3 tests/test_acceptance.py`` for just this suite.
"""
import contextlib
import sys
import time
from fractions import Fraction

import pytest

import conftest
import test_calculus
import test_cq
import test_lp
import test_optimality
import test_oracle
from qdopt import optimality
from qdopt.analysis import NON_OPTIMAL, analyze
from qdopt.calculus import qd_sum_set
from qdopt.cq import Selection, check_cq, check_qd_mfcq, passing_selections, search_selection
from qdopt.geometry import general_position_at, max_face_singleton, negate, nullspace
from qdopt.optimality import build_cone_k, check_cone_condition, refute_optimality, sample_cone_rays
from qdopt.oracle import SamplingConfig, contingent_membership, local_improvement
from qdopt.problem import load_bundled

F = Fraction
LIMIT = 10.0
FINE = SamplingConfig(steps=(1e-3, 1e-4))


@contextlib.contextmanager
def criterion(n, label):
    t0 = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        dt = time.perf_counter() - t0
        ok = ok and dt < LIMIT
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({dt:.2f}s) {label}"
        conftest.ACCEPTANCE_LINES.append(line)
        print(line)
    assert dt < LIMIT, f"criterion {n} took {dt:.1f}s"


def vs(P):
    return set(P.canonical().vertices)


def pts(*ps):
    return {tuple(F(c) for c in p) for p in ps}


def ray_probes(d):
    """20 multiples of ``d`` and 20 nearby vectors off the ray."""
    on = [tuple(F(k, 3) * c for c in d) for k in range(20)]
    off = [tuple(F(k, 3) * c for c in d) for k in range(1, 11)]
    off = [(a + 1, b) for a, b in off] + [(-a, -b) for a, b in off]
    return on, off


def test_criterion_1_abs_graph():
    with criterion(1, "graph of |x1| with x1 <= 0"):
        p = load_bundled("abs_graph")
        f, g = p.qd_equalities[0], p.qd_inequalities[0]
        assert vs(f.sub) == pts((1, -1), (-1, -1)) and vs(f.sup) == pts((0, 0))
        assert vs(g.sub) == pts((1, 0)) and vs(g.sup) == pts((0, 0))
        sel = Selection(((-1, -1),), ((0, 0),), ((0, 0),))
        w = check_cq(p, sel)
        assert w is not None and w.margin > 0 and w.replay(p, sel)
        K = build_cone_k(p, sel)
        on, off = ray_probes((-1, 1))
        assert len(on) == len(off) == 20
        assert all(K.member(v) for v in on) and not any(K.member(v) for v in off)
        # the sum set spans the plane, so no nonzero v0 can annihilate it
        assert nullspace(list(qd_sum_set(f).vertices), 2) == []
        assert not check_qd_mfcq(p).holds


def test_criterion_2_sine_cross():
    with criterion(2, "|sin x1| - |sin x2| = 0"):
        p = load_bundled("sine_cross")
        f = p.qd_equalities[0]
        assert vs(f.sub) == pts((1, 0), (-1, 0)) and vs(f.sup) == pts((0, 1), (0, -1))
        assert vs(qd_sum_set(f)) == pts((1, 1), (1, -1), (-1, 1), (-1, -1))
        xp, xm, yp, ym = (1, 0), (-1, 0), (0, 1), (0, -1)
        expected = {(xp, yp): (1, -1), (xm, yp): (-1, -1), (xp, ym): (1, 1), (xm, ym): (-1, 1)}
        found = {(s.x_star[0], s.y_star[0]) for s, _ in passing_selections(p)}
        assert found == set(expected)
        assert search_selection(p).found
        for (x, y), d in expected.items():
            K = build_cone_k(p, Selection((x,), (y,)))
            on, off = ray_probes(d)
            assert all(K.member(v) for v in on) and not any(K.member(v) for v in off)
        assert not check_qd_mfcq(p).holds


def test_criterion_3_degenerate_cubic():
    with criterion(3, "min(x, x^3) <= 0, minimize x"):
        p = load_bundled("degenerate_cubic")
        g = p.qd_inequalities[0]
        assert vs(g.sub) == pts((0,)) and vs(g.sup) == pts((0,), (1,))
        r = search_selection(p)
        assert r.found and r.selection.z_star == ((1,),)
        assert not check_cone_condition(p, r.selection, (0,)).certified
        assert refute_optimality(p, r.selection).status == optimality.NON_OPTIMAL
        assert analyze(p).classification == NON_OPTIMAL
        b = local_improvement(p)
        assert b is not None and b.exact and b.value < 0


def test_criterion_4_dc_halfplane():
    with criterion(4, "|x1| - |x2| over x2 <= x1"):
        p = load_bundled("dc_halfplane")
        r = search_selection(p)
        assert r.found
        assert vs(p.qd_inequalities[0].sub) != pts((0, 0))
        ref = refute_optimality(p, r.selection)
        assert ref.status == optimality.NON_OPTIMAL and ref.witness == (0, 1)
        b = local_improvement(p, directions=[(1, -2)])
        assert b is not None and b.exact and b.value < 0
        assert b.point[1] == -2 * b.point[0]


def test_criterion_5_cq_beyond_general_position():
    with criterion(5, "general position and singleton max-faces are not needed"):
        p = load_bundled("max_min_wedge")
        g = p.qd_inequalities[0]
        assert general_position_at((1, 1), g.sub, negate(g.sup)) is False
        r = search_selection(p)
        z = r.selection.z_star[0]
        assert r.found and z in g.sup.canonical().vertices and z != (-1, -1)

        p = load_bundled("sine_kernel_gap")
        f = p.qd_equalities[0]
        assert vs(f.sub) == pts((1, 1), (0, 0)) and vs(f.sup) == pts((-1, -1), (1, 0))
        assert check_cq(p, Selection(((0, 0),), ((1, 0),))) is not None
        s = contingent_membership(p, (0, 0), (1, 1), FINE)
        assert s.scores[0] > 0.1

        p = load_bundled("flat_face")
        f = p.qd_equalities[0]
        assert max_face_singleton(f.sub, (1, 0)) is False
        assert check_cq(p, Selection(((0, 0),), ((0, 2),))) is not None


def test_criterion_6_property_suites():
    with criterion(6, "property suites (a)-(f)"):
        test_calculus.test_shift_invariance_200()
        test_cq.test_assumptions_match_geometric_form()
        test_cq.test_mfcq_implies_every_selection_passes()
        test_oracle.test_fd_matches_exact_on_random_dc()
        test_optimality.test_certificate_replay_random()
        test_lp.test_vertex_enumeration_oracle()


def test_criterion_7_cone_inside_tangent_cone():
    with criterion(7, "sampled rays of K lie in the contingent cone"):
        cases = [("abs_graph", Selection(((-1, -1),), ((0, 0),), ((0, 0),)))]
        cases += [("sine_cross", s) for s, _ in passing_selections(load_bundled("sine_cross"))]
        cases += [("max_min_wedge", search_selection(load_bundled("max_min_wedge")).selection)]
        assert len(cases) == 6
        for name, sel in cases:
            p = load_bundled(name)
            K = build_cone_k(p, sel)
            rays = sample_cone_rays(K, 50, seed=1)
            assert len(rays) == 50
            worst = max(contingent_membership(p, p.anchor, v, FINE).score for v in rays)
            assert worst < 1e-3, (name, sel, worst)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
