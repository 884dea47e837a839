import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from coordmech.core import Instance, Policy, lambda_term
from coordmech.geometry import (Signature, chung_ratio, chung_sums, chung_tight_family,
                                cost_identity_report, direct_cross_term, kernel_apply,
                                kernel_inner, kernel_pd_check, l2_inner, leading_minors,
                                kernel_matrix, lemma_ineq_check, lemma_ineq_holds,
                                rand_cost_from_signature, signature, step_profile)
from coordmech.policies import policy_completion

from conftest import instance_and_assignment, one_machine


def test_profile_single_job():
    prof = step_profile(one_machine([1], [3]), [0])
    assert prof.value(0, 0) == 1 and prof.value(0, F(29, 10)) == 1 and prof.value(0, 3) == 0
    assert l2_inner(prof, prof) == 3


def test_profile_pair(pair):
    prof = step_profile(pair, [0, 0])
    assert [prof.value(0, y) for y in (0, F(1, 2), 1, F(3, 2), 2, 5)] == [2, 2, 1, 1, 0, 0]
    assert l2_inner(prof, prof) == 5


def test_profile_empty_machine():
    inst = Instance([1], [[1], [2]])
    prof = step_profile(inst, [0])
    assert prof.value(1, 0) == 0
    zero = step_profile(Instance([1], [[1], [2]]), [1])
    assert l2_inner(prof, zero) == 0


def test_signature_merges_equal_ratios():
    inst = Instance([1, 3], [[2, 6]])
    assert signature(inst, [0, 0]).machines[0] == {F(2): F(4)}


def test_signature_machines_independent():
    inst = Instance([1, 1], [[1, 5], [5, 2]])
    sig = signature(inst, [0, 1])
    assert sig.machines[0] == {F(1): 1} and sig.machines[1] == {F(2): 1}


def test_kernel_examples():
    one = Signature({0: {F(1): F(1)}})
    two = Signature({0: {F(1): F(1), F(2): F(1)}})
    assert kernel_inner(one, one) == F(1, 2)
    assert kernel_inner(two, two) == F(17, 6)
    assert kernel_inner(one, Signature({1: {F(1): F(1)}})) == 0


def test_kernel_apply_matches_rand_cost(pair):
    # the longer job sees (M u)(2) + p/2 with u = {1: 1, 2: 1}
    assert kernel_apply({F(1): 1, F(2): 1}, F(2)) + 1 == F(8, 3)
    assert rand_cost_from_signature(pair, [0, 0], 1) == F(8, 3)


def test_pd_small_minors():
    assert kernel_pd_check(1) == (True, [F(1, 2)])
    ok, minors = kernel_pd_check(2)
    assert ok and minors[1] == F(1, 18)


def test_pd_kappa_25():
    ok, minors = kernel_pd_check(25)
    assert ok and len(minors) == 25 and all(d > 0 for d in minors)


def test_pd_rejects_bad_kappa():
    with pytest.raises(ValueError):
        kernel_pd_check(0)


def test_leading_minors_against_numpy():
    import numpy as np
    mat = kernel_matrix(6)
    exact = leading_minors(mat)
    arr = np.array([[float(v) for v in row] for row in mat])
    for k in range(1, 7):
        assert math.isclose(float(exact[k - 1]), np.linalg.det(arr[:k, :k]), rel_tol=1e-6)


@given(st.dictionaries(st.fractions(min_value=F(1, 8), max_value=8, max_denominator=8),
                       st.fractions(min_value=-3, max_value=3, max_denominator=4),
                       min_size=1, max_size=6))
def test_kernel_norm_positive(u):
    u = {r: w for r, w in u.items() if w != 0}
    if u:
        assert kernel_inner(Signature({0: u}), Signature({0: u})) > 0


def test_chung_examples():
    assert chung_ratio([(F(3), F(2))]) == 0.5
    assert chung_ratio([(1, 1), (1, 1)]) == 0.5
    ratios = chung_tight_family(200)
    assert 0.70 < ratios[-1] < math.pi / 4
    assert all(b > a for a, b in zip(ratios, ratios[1:]))


def test_chung_float_path_matches_exact():
    pts = [(F(1, j * j), F(1)) for j in range(1, 30)]
    exact = chung_ratio(pts)
    floats = chung_ratio([(float(r), float(u)) for r, u in pts])
    assert math.isclose(exact, floats, rel_tol=1e-12)
    assert math.isclose(exact, chung_tight_family(29)[-1], rel_tol=1e-12)


@given(st.lists(st.tuples(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3)), min_size=1, max_size=30))
def test_chung_bound_random(points):
    assert chung_ratio(points) < math.pi / 4 + 1e-12


def test_chung_rejects_nonpositive():
    with pytest.raises(ValueError):
        chung_sums([(0, 1)])


def test_integer_inequality_examples():
    assert lemma_ineq_holds(1, 1)
    assert 6 * 1 * 2 == 2 * 1 + 5 * 1 * 2  # equality case
    assert lemma_ineq_holds(5, 0)
    assert lemma_ineq_check(500)
    with pytest.raises(ValueError):
        lemma_ineq_check(-1)


def test_identity_report_running_example(pair):
    rep = cost_identity_report(pair, [0, 0])
    assert rep.all_identities_hold
    assert (rep.phi_norm_sq, rep.lambda_term, rep.c_sr, rep.c_ps) == (5, 3, 4, 5)
    assert rep.kernel_norm_sq == F(17, 6) and rep.c_r == F(13, 3)


def test_identity_report_single_job():
    rep = cost_identity_report(one_machine([2], [3]), [0])
    assert rep.c_sr == rep.c_ps == rep.c_r == 6 and rep.c_a == 12


@given(instance_and_assignment(max_jobs=7, max_machines=3))
def test_identities_hold(case):
    inst, x = case
    rep = cost_identity_report(inst, x)
    assert rep.all_identities_hold, rep.checks


@given(instance_and_assignment(max_jobs=6), st.randoms(use_true_random=False))
def test_cross_term_matches_l2(case, rnd):
    inst, x = case
    x_star = [rnd.choice(inst.feasible_machines(j)) for j in range(inst.num_jobs)]
    assert l2_inner(step_profile(inst, x), step_profile(inst, x_star)) == direct_cross_term(inst, x, x_star)


@given(instance_and_assignment())
def test_rand_signature_form(case):
    inst, x = case
    rep = policy_completion(inst, x, Policy.RAND)
    for j in range(inst.num_jobs):
        assert rand_cost_from_signature(inst, x, j) == rep.completion[j]
