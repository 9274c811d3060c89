import random
from fractions import Fraction

import pytest

from conftest import rand_dc, rand_problem
from qdopt.cq import Selection, build_ci, search_selection
from qdopt.expr import parse
from qdopt.geometry import dot
from qdopt.optimality import (CONSISTENT, NON_OPTIMAL, CQNotEstablished, NotCertified,
                              build_cone_k, check_cone_condition,
                              check_normal_cone_condition, cone_k_member,
                              extract_multipliers, normal_cone_cq, polar_check,
                              refute_optimality, sample_cone_rays,
                              search_normal_cone_selection)
from qdopt.problem import PolyhedralSet, Problem, load_bundled

F = Fraction
ABS_SEL = Selection(((-1, -1),), ((0, 0),), ((0, 0),))


def problem(eqs=(), ineqs=(), n=2, obj="0", set_A=None):
    return Problem(n, (0,) * n, parse(obj), tuple(map(parse, eqs)), tuple(map(parse, ineqs)),
                   set_A)


# -- cone K --------------------------------------------------------------------------------

def test_cone_abs_graph():
    K = build_cone_k(load_bundled("abs_graph"), ABS_SEL)
    assert K.cq and len(K.rows) == 4
    assert {tuple(r) for r in K.rows} == {(1, -1), (-1, -1), (1, 1), (1, 0)}
    assert K.describe() == "K = cone{(-1, 1)}"
    assert cone_k_member(K, (-2, 2)) and cone_k_member(K, (0, 0))
    assert not cone_k_member(K, (1, -1)) and not cone_k_member(K, (0, 1))


def test_cone_sine_cross_first_ray():
    K = build_cone_k(load_bundled("sine_cross"), Selection(((1, 0),), ((0, 1),)))
    assert K.extreme_rays() == [(1, -1)]
    assert cone_k_member(K, (3, -3)) and not cone_k_member(K, (1, 1))


def test_cone_unconstrained():
    K = build_cone_k(problem(obj="abs(x1)"), Selection())
    assert K.rows == () and K.describe() == "K = R^2"
    assert cone_k_member(K, (5, -7)) and cone_k_member(K, (0, 0))


def test_cone_trivial_and_not_pointed():
    K = build_cone_k(problem(ineqs=["abs(x1) + abs(x2)"]), Selection((), (), ((0, 0),)), check=False)
    assert K.describe() == "K = {0}"
    K = build_cone_k(load_bundled("dc_halfplane"), Selection((), (), ((0, 0),)))
    assert K.extreme_rays() is None and "not pointed" in K.describe()


def test_membership_dimension_check():
    K = build_cone_k(load_bundled("abs_graph"), ABS_SEL)
    with pytest.raises(ValueError):
        K.member((1, 2, 3))


# -- KKT checks -------------------------------------------------------------------------------

def test_degenerate_cubic_refuted():
    p = load_bundled("degenerate_cubic")
    r = check_cone_condition(p, Selection((), (), ((1,),)), (0,))
    assert not r.certified


def test_dc_halfplane_witness():
    p = load_bundled("dc_halfplane")
    sel = Selection((), (), ((0, 0),))
    assert not check_cone_condition(p, sel, (0, 1)).certified
    r = check_cone_condition(p, sel, (0, -1))
    assert r.certified and r.certificate.lambdas == (1,) and r.certificate.replay(p)


def test_stationary_smooth_point():
    p = problem(obj="pow(x1, 2)", n=1)
    r = check_cone_condition(p, Selection(), (0,))
    assert r.certified and r.certificate.lambdas == () and r.certificate.mu_under == ()


def test_linear_equality_multipliers():
    sel = Selection(((1, -1),), ((0, 0),))
    with pytest.raises(NotCertified):
        extract_multipliers(problem(["x1 - x2"], obj="x1"), sel, (0, 0))
    # the gradients (1,1) and (1,-1) are independent, so no multiplier balances x1 + x2
    with pytest.raises(NotCertified):
        extract_multipliers(problem(["x1 - x2"], obj="x1 + x2"), sel, (0, 0))
    p = problem(["x1 - x2"], obj="x1 - x2")
    c = extract_multipliers(p, sel, (0, 0))
    assert (c.mu_under, c.mu_over) == ((0,), (1,)) and c.replay(p)


def test_abs_graph_smooth_objective():
    p = problem(["abs(x1) - x2"], ["x1"], obj="x2")
    # x2 >= |x1| >= 0 on the feasible set, so the anchor is a minimizer
    r = check_cone_condition(p, ABS_SEL, (0, 0))
    assert r.certified and r.certificate.replay(p)


def test_invalid_y0():
    p = load_bundled("dc_halfplane")
    with pytest.raises(ValueError):
        check_cone_condition(p, Selection((), (), ((0, 0),)), (5, 5))


def test_refutations():
    r = refute_optimality(load_bundled("degenerate_cubic"), Selection((), (), ((1,),)))
    assert r.status == NON_OPTIMAL
    r = refute_optimality(load_bundled("dc_halfplane"), Selection((), (), ((0, 0),)))
    assert r.status == NON_OPTIMAL and r.witness == (0, 1)
    r = refute_optimality(problem(obj="abs(x1)", n=1), Selection())
    assert r.status == CONSISTENT
    with pytest.raises(CQNotEstablished):
        refute_optimality(load_bundled("max_min_wedge"), Selection((), (), ((-1, -1),)))


def test_inactive_constraints_ignored():
    p = Problem(1, (0,), parse("x1"), (), (parse("x1 - 1"), parse("min(x1, pow(x1, 3))")))
    assert p.active == (1,)
    r = check_cone_condition(p, Selection((), (), ((1,),)), (0,))
    assert not r.certified
    q = Problem(1, (0,), parse("-x1"), (), (parse("x1 - 1"), parse("x1")))
    c = check_cone_condition(q, Selection((), (), ((0,),)), (0,)).certificate
    assert c.lambdas == (0, 1) and c.replay(q)


# -- normal cone ------------------------------------------------------------------------------

def test_normal_cone_whole_space_reduces():
    p = Problem(1, (0,), parse("x1"), (), (parse("min(x1, pow(x1, 3))"),), PolyhedralSet())
    r = check_normal_cone_condition(p, [(1,)], (0,))
    assert r.cq_holds and not r.certified
    z, _ = search_normal_cone_selection(p)
    assert z == ((1,),)


def test_normal_cone_halfplane():
    A = PolyhedralSet((((1, 0), 0),))
    assert not check_normal_cone_condition(problem(obj="x1", set_A=A), [], (0, 0)).certified
    r = check_normal_cone_condition(problem(obj="-x1", set_A=A), [], (0, 0))
    assert r.certified and r.certificate.replay(problem(obj="-x1", set_A=A))
    assert dict((t, c) for t, _, c in r.certificate.combo)["N1"] == 1


def test_normal_cone_cq_gate():
    A = PolyhedralSet((((-1, 0), 0),))
    p = problem(ineqs=["x1"], obj="x2", set_A=A)
    assert not normal_cone_cq(p, [(0, 0)])
    r = check_normal_cone_condition(p, [(0, 0)], (0, 0))
    assert not r.cq_holds and r.status is None


def test_normal_cone_rejects_equalities():
    with pytest.raises(ValueError):
        check_normal_cone_condition(problem(["x1"], set_A=PolyhedralSet()), [], (0, 0))


# -- polar identity -----------------------------------------------------------------------------

def test_polar_check_examples():
    p = load_bundled("abs_graph")
    assert polar_check(p, ABS_SEL, (1, 1))
    assert not polar_check(p, ABS_SEL, (-1, 1))
    assert polar_check(p, ABS_SEL, (0, 0))


def test_polar_identity_sampled():
    rng = random.Random(2)
    for name, sel in [("abs_graph", ABS_SEL), ("sine_cross", Selection(((1, 0),), ((0, 1),))),
                      ("sine_kernel_gap", Selection(((0, 0),), ((1, 0),)))]:
        p = load_bundled(name)
        sel_eq = Selection(sel.x_star, sel.y_star, ())
        p_eq = Problem(p.n, p.anchor, p.objective, p.equalities, ())
        K = build_cone_k(p_eq, sel_eq)
        vs = sample_cone_rays(K, 100, seed=3)
        gens = [g for i in range(len(p.equalities)) for c in [build_ci(p, sel, i)]
                for g in c.piece_a.vertices + c.piece_b.vertices]
        cands = [tuple(F(rng.randint(-3, 3)) for _ in range(p.n)) for _ in range(30)] + gens
        for cand in cands:
            if polar_check(p_eq, sel_eq, cand):
                assert all(dot(cand, v) <= 0 for v in vs)
        for v in vs:
            assert K.member(v)
            assert all(dot(g, v) <= 0 for g in gens)


# -- random certificates ---------------------------------------------------------------------------

def test_certificate_replay_random():
    rng = random.Random(13)
    certified = refuted = inactive = 0
    for _ in range(150):
        m, l = rng.choice([(0, 1), (1, 0), (1, 1), (0, 2)])
        p = rand_problem(rng, 2, m, l, depth=2)
        obj, ineqs = p.objective, p.inequalities
        if rng.random() < 0.5:
            obj = parse(rand_dc(rng, 2, 1))
        if rng.random() < 0.5:
            # value -1 at the anchor: inactive, so its multiplier must vanish
            ineqs += (parse(f"({rand_dc(rng, 2, 1)}) - 1"),)
        p = Problem(2, (0, 0), obj, p.equalities, ineqs)
        r = search_selection(p, budget=50)
        if not r.found:
            continue
        for y0 in p.qd_objective.sup.canonical().vertices:
            res = check_cone_condition(p, r.selection, y0)
            if not res.certified:
                refuted += 1
                with pytest.raises(NotCertified):
                    extract_multipliers(p, r.selection, y0)
                continue
            certified += 1
            c = res.certificate
            assert c.replay(p)
            assert all(x >= 0 for x in c.lambdas + c.mu_under + c.mu_over)
            assert all(c.lambdas[j] == 0 for j in range(len(ineqs)) if j not in p.active)
            inactive += len(ineqs) - len(p.active)
            assert extract_multipliers(p, r.selection, y0) == c
    assert certified >= 20 and refuted >= 20 and inactive >= 10, (certified, refuted, inactive)
