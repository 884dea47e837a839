import itertools
import math
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from coordmech.core import Instance, Policy
from coordmech.policies import (DeviationQuery, deviation_cost, fluid_simulate_ps, job_cost,
                                policy_completion, ps_cost_split, rand_exhaustive_expectation,
                                rand_precedence_prob, rand_sample_order, social_cost)

from conftest import instance_and_assignment, instances, one_machine


@pytest.mark.parametrize("policy, completion, total", [
    (Policy.SMITH_RULE, (1, 3), 4),
    (Policy.PROPORTIONAL_SHARING, (2, 3), 5),
    (Policy.RAND, (F(5, 3), F(8, 3)), F(13, 3)),
])
def test_running_example(pair, policy, completion, total):
    rep = policy_completion(pair, [0, 0], policy)
    assert rep.completion == completion
    assert rep.weighted_total == total


def test_approx_doubles_smith(pair):
    assert social_cost(pair, [0, 0], Policy.APPROX) == 8


@pytest.mark.parametrize("policy", [Policy.SMITH_RULE, Policy.PROPORTIONAL_SHARING, Policy.RAND])
def test_lone_job_deviation(policy):
    inst = Instance([2, 1], [[5, 1], [3, 1]])
    assert deviation_cost(inst, [0, 0], DeviationQuery(0, 1), policy) == 2 * 3


def test_lone_job_pays_double_under_approx():
    inst = Instance([2, 1], [[5, 1], [3, 1]])
    assert deviation_cost(inst, [0, 0], DeviationQuery(0, 1), Policy.APPROX) == 2 * 2 * 3


def test_ps_deviation_example():
    inst = Instance([1, 1], [[1, None], [1, 2]])
    assert deviation_cost(inst, [0, 1], DeviationQuery(0, 1), Policy.PROPORTIONAL_SHARING) == 2


def test_rand_deviation_example():
    inst = Instance([1, 1], [[1, None], [1, 2]])
    assert deviation_cost(inst, [0, 1], DeviationQuery(0, 1), Policy.RAND) == F(5, 3)


@pytest.mark.parametrize("pair_, expected", [((1, 1), F(1, 2)), ((1, 2), F(2, 3)),
                                             ((3, 1), F(1, 4)), ((0, 0), F(1, 2))])
def test_precedence_prob(pair_, expected):
    assert rand_precedence_prob(*pair_) == expected


@given(st.fractions(min_value=F(1, 10), max_value=10), st.fractions(min_value=F(1, 10), max_value=10))
def test_precedence_complements(a, b):
    assert rand_precedence_prob(a, b) + rand_precedence_prob(b, a) == 1


def test_fluid_examples():
    inst = one_machine([1, 1], [1, 1])
    assert fluid_simulate_ps(inst, 0, [0, 1]) == {0: 2, 1: 2}
    inst = one_machine([1, 1], [1, 2])
    assert fluid_simulate_ps(inst, 0, [0, 1]) == {0: 2, 1: 3}


def test_exhaustive_examples():
    inst = one_machine([1, 1], [1, 1])
    assert rand_exhaustive_expectation(inst, 0, [0, 1]) == {0: F(3, 2), 1: F(3, 2)}
    inst = one_machine([1, 1], [1, 2])
    assert rand_exhaustive_expectation(inst, 0, [0, 1]) == {0: F(5, 3), 1: F(8, 3)}
    assert rand_exhaustive_expectation(one_machine([2], [7]), 0, [0]) == {0: 7}


def test_exhaustive_limit():
    inst = one_machine([1] * 10, [1] * 10)
    with pytest.raises(ValueError):
        rand_exhaustive_expectation(inst, 0, range(10))


@given(instance_and_assignment())
def test_smith_dominated_per_job(case):
    inst, x = case
    sr = policy_completion(inst, x, Policy.SMITH_RULE).completion
    ps = policy_completion(inst, x, Policy.PROPORTIONAL_SHARING).completion
    assert all(a <= b for a, b in zip(sr, ps))
    for policy in (Policy.PROPORTIONAL_SHARING, Policy.RAND, Policy.APPROX):
        assert social_cost(inst, x, Policy.SMITH_RULE) <= social_cost(inst, x, policy)


@given(instance_and_assignment(max_jobs=6, max_machines=2))
def test_ps_forms_and_fluid_agree(case):
    inst, x = case
    completion = policy_completion(inst, x, Policy.PROPORTIONAL_SHARING).completion
    for i in range(inst.num_machines):
        jobs = x.jobs_on(i)
        if not jobs:
            continue
        fluid = fluid_simulate_ps(inst, i, jobs)
        for j in jobs:
            others = [k for k in jobs if k != j]
            split = ps_cost_split(inst, i, others, j)
            assert split == job_cost(inst, i, others, j, Policy.PROPORTIONAL_SHARING)
            assert split == inst.weights[j] * fluid[j]
            assert fluid[j] == completion[j]


@given(instance_and_assignment(max_jobs=6, max_machines=2))
def test_rand_closed_form_matches_enumeration(case):
    inst, x = case
    completion = policy_completion(inst, x, Policy.RAND).completion
    for i in range(inst.num_machines):
        jobs = x.jobs_on(i)
        if jobs:
            exact = rand_exhaustive_expectation(inst, i, jobs)
            assert all(exact[j] == completion[j] for j in jobs)


@given(instance_and_assignment())
def test_deviation_to_own_machine_is_current_cost(case):
    inst, x = case
    for policy in Policy:
        rep = policy_completion(inst, x, policy)
        for j in range(inst.num_jobs):
            got = deviation_cost(inst, x, DeviationQuery(j, x[j]), policy)
            assert got == inst.weights[j] * rep.completion[j]


def test_sampler_singleton():
    inst = one_machine([1], [3])
    assert rand_sample_order(inst, 0, [0], seed=5) == [0]


def test_sampler_is_deterministic():
    inst = one_machine([1, 2, 3], [1, 1, 1])
    assert rand_sample_order(inst, 0, [0, 1, 2], 9) == rand_sample_order(inst, 0, [0, 1, 2], 9)


def test_sampler_exact_law_small():
    # the probability of every ordering, computed from the sampler's own
    # sequential rule, reproduces the pairwise precedence law exactly
    from coordmech.policies import _order_probability
    inst = one_machine([1, 1, 2, 1], [1, 2, 3, 5])
    rhos = {j: inst.rho(0, j) for j in range(4)}
    assert sum(_order_probability([rhos[j] for j in order])
               for order in itertools.permutations(range(4))) == 1
    for a, b in itertools.permutations(range(4), 2):
        prob = sum(_order_probability([rhos[j] for j in order])
                   for order in itertools.permutations(range(4))
                   if order.index(a) < order.index(b))
        assert prob == rand_precedence_prob(rhos[a], rhos[b])


def test_sampler_monte_carlo():
    inst = one_machine([1, 1], [1, 2])
    trials = 20000
    first = sum(rand_sample_order(inst, 0, [0, 1], s)[0] == 0 for s in range(trials))
    p = F(2, 3)
    sigma = math.sqrt(trials * p * (1 - p))
    assert abs(first - trials * p) <= 4 * sigma
