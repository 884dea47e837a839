"""Completion times under SmithRule, ProportionalSharing, Rand and Approx.

All costs are exact.  ``job_cost`` prices one job: the weighted completion
time of ``job`` on ``machine`` when ``others`` are the remaining jobs there.
Deviations go through it.  Whole machines are priced by ``policy_completion``
with sorted prefix sums for SmithRule, ProportionalSharing and Approx, which is
the same quantity computed in O(n log n) instead of pairwise.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .core import (AssignmentError, CostReport, Instance, Policy, check_assignment,
                   lambda_term)

ZERO = Fraction(0)
HALF = Fraction(1, 2)


@dataclass(frozen=True)
class DeviationQuery:
    job: int
    target_machine: int


def machine_groups(assignment: Sequence[int]) -> dict[int, list[int]]:
    """Jobs per occupied machine, in job order."""
    groups: dict[int, list[int]] = {}
    for j, i in enumerate(assignment):
        groups.setdefault(i, []).append(j)
    return groups


def rand_precedence_prob(rho_j, rho_k) -> Fraction:
    """Probability that a job with ratio ``rho_j`` runs before one with ``rho_k``."""
    rho_j, rho_k = Fraction(rho_j), Fraction(rho_k)
    if rho_j < 0 or rho_k < 0:
        raise ValueError("ratios must be non-negative")
    total = rho_j + rho_k
    if total == 0:
        return HALF
    return rho_k / total


def job_cost(instance: Instance, machine: int, others: Iterable[int], job: int,
             policy: Policy) -> Fraction:
    """Weighted completion time of ``job`` on ``machine`` next to ``others``."""
    p = instance.p(machine, job)
    if p is None:
        raise AssignmentError(f"job {job} cannot run on machine {machine}")
    w = instance.weights[job]
    if policy is Policy.SMITH_RULE:
        key = instance.smith_key(machine, job)
        ahead = sum((instance.p(machine, k) for k in others
                     if instance.smith_key(machine, k) < key), ZERO)
        return w * (ahead + p)
    rho = instance.rho(machine, job)
    if policy is Policy.RAND:
        delay = ZERO
        for k in others:
            delay += instance.p(machine, k) * rand_precedence_prob(instance.rho(machine, k), rho)
        return w * (delay + p)
    shared = ZERO
    for k in others:
        shared += instance.weights[k] * min(instance.rho(machine, k), rho)
    cost = w * shared + w * p
    if policy is Policy.APPROX:
        cost += w * p
    return cost


def ps_cost_split(instance: Instance, machine: int, others: Iterable[int], job: int) -> Fraction:
    """ProportionalSharing cost in its two-sum form (shorter jobs, then longer ones)."""
    w, p, rho = instance.weights[job], instance.p(machine, job), instance.rho(machine, job)
    total = w * p
    for k in others:
        if instance.rho(machine, k) <= rho:
            total += w * instance.p(machine, k)
        else:
            total += instance.weights[k] * p
    return total


def _machine_completions(instance: Instance, machine: int, jobs: list, policy: Policy) -> dict:
    if policy is Policy.SMITH_RULE:
        out, t = {}, ZERO
        for j in sorted(jobs, key=lambda j: instance.smith_key(machine, j)):
            t += instance.p(machine, j)
            out[j] = t
        return out
    if policy is Policy.RAND:
        # one pass per unordered pair: k precedes j with probability rho_j/(rho_j+rho_k)
        out = {j: instance.p(machine, j) for j in jobs}
        for a, j in enumerate(jobs):
            rj, pj = instance.rho(machine, j), instance.p(machine, j)
            for k in jobs[a + 1:]:
                rk, pk = instance.rho(machine, k), instance.p(machine, k)
                s = rj + rk
                out[j] += pk * rj / s
                out[k] += pj * rk / s
        return out
    # c_j = sum_{rho_k <= rho_j} w_k rho_k + rho_j * sum_{rho_k > rho_j} w_k, own term included
    by_rho: dict = {}
    for j in jobs:
        by_rho.setdefault(instance.rho(machine, j), []).append(j)
    heavier = sum((instance.weights[j] for j in jobs), ZERO)
    below = ZERO
    out = {}
    for rho in sorted(by_rho):
        group = by_rho[rho]
        heavier -= sum((instance.weights[j] for j in group), ZERO)
        below += sum((instance.p(machine, j) for j in group), ZERO)
        shared = below + rho * heavier
        for j in group:
            out[j] = shared + instance.p(machine, j) if policy is Policy.APPROX else shared
    return out


def policy_completion(instance: Instance, assignment: Sequence[int], policy: Policy) -> CostReport:
    x = check_assignment(instance, assignment)
    completion = [ZERO] * instance.num_jobs
    total = ZERO
    for i, jobs in machine_groups(x).items():
        for j, c in _machine_completions(instance, i, jobs, policy).items():
            completion[j] = c
            total += instance.weights[j] * c
    return CostReport(tuple(completion), total, lambda_term(instance, x))


def social_cost(instance: Instance, assignment: Sequence[int], policy: Policy) -> Fraction:
    return policy_completion(instance, assignment, policy).weighted_total


def deviation_cost(instance: Instance, assignment: Sequence[int], query: DeviationQuery,
                   policy: Policy) -> Fraction:
    """Weighted cost of ``query.job`` after it moves alone to ``query.target_machine``."""
    j, target = query.job, query.target_machine
    if not instance.feasible(target, j):
        raise AssignmentError(f"machine {target} is forbidden for job {j}")
    others = [k for k, i in enumerate(assignment) if i == target and k != j]
    return job_cost(instance, target, others, j, policy)


# -- oracles -------------------------------------------------------------------

def fluid_simulate_ps(instance: Instance, machine: int, jobset: Sequence[int]) -> dict[int, Fraction]:
    """Event-driven ProportionalSharing: live job k is served at rate w_k / W."""
    remaining = {j: instance.p(machine, j) for j in jobset}
    if any(r is None for r in remaining.values()):
        raise AssignmentError("job set is not feasible on this machine")
    done: dict[int, Fraction] = {}
    now = ZERO
    while remaining:
        live_weight = sum(instance.weights[j] for j in remaining)
        # time until the next job runs out of work
        step = min(r * live_weight / instance.weights[j] for j, r in remaining.items())
        now += step
        for j in list(remaining):
            remaining[j] -= step * instance.weights[j] / live_weight
            if remaining[j] == 0:
                done[j] = now
                del remaining[j]
    return done


def _order_probability(rhos: Sequence[Fraction]) -> Fraction:
    """Chance that the back-to-front sampler emits exactly this order."""
    prob = Fraction(1)
    total = sum(rhos, ZERO)
    for idx in range(len(rhos) - 1, 0, -1):
        if total == 0:
            prob /= idx + 1
        else:
            prob *= rhos[idx] / total
        total -= rhos[idx]
    return prob


def rand_exhaustive_expectation(instance: Instance, machine: int, jobset: Sequence[int],
                                limit: int = 9) -> dict[int, Fraction]:
    """Expected Rand completion times by enumerating every ordering."""
    jobs = list(jobset)
    if len(jobs) > limit:
        raise ValueError(f"{len(jobs)} jobs exceed the enumeration limit of {limit}")
    if any(not instance.feasible(machine, j) for j in jobs):
        raise AssignmentError("job set is not feasible on this machine")
    expected = {j: ZERO for j in jobs}
    for order in itertools.permutations(jobs):
        prob = _order_probability([instance.rho(machine, j) for j in order])
        if prob == 0:
            continue
        t = ZERO
        for j in order:
            t += instance.p(machine, j)
            expected[j] += prob * t
    return expected


def rand_sample_order(instance: Instance, machine: int, jobset: Sequence[int], seed) -> list[int]:
    """Draw a Rand ordering: repeatedly pick a job with chance proportional to
    its ratio and put it at the back."""
    rng = random.Random(seed)
    pool = list(jobset)
    rhos = [instance.rho(machine, j) for j in pool]
    scale = math.lcm(*(r.denominator for r in rhos)) if rhos else 1
    ticks = [int(r * scale) for r in rhos]
    back = []
    while pool:
        total = sum(ticks)
        if total == 0:
            pick = rng.randrange(len(pool))
        else:
            draw = rng.randrange(total)
            pick = 0
            while draw >= ticks[pick]:
                draw -= ticks[pick]
                pick += 1
        back.append(pool.pop(pick))
        ticks.pop(pick)
    back.reverse()
    return back
