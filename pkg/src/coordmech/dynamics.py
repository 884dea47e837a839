"""Potentials, equilibrium checks and best-response dynamics."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .core import Assignment, Instance, Policy, check_assignment, format_fraction, lambda_term
from .policies import job_cost, machine_groups, social_cost

log = logging.getLogger(__name__)

ZERO = Fraction(0)


class NoPotentialError(ValueError):
    """SmithRule games need not have a pure equilibrium, so no potential exists."""


@dataclass(frozen=True)
class DynamicsConfig:
    alpha: Fraction
    epsilon: Fraction
    max_steps: int = 100_000
    policy: Policy = Policy.APPROX

    def __post_init__(self):
        alpha, eps = Fraction(self.alpha), Fraction(self.epsilon)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "epsilon", eps)
        if not 0 < alpha < eps < Fraction(1, 8):
            raise ValueError("need 0 < alpha < epsilon < 1/8")
        if self.max_steps < 0:
            raise ValueError("max_steps must be non-negative")
        if self.policy is Policy.SMITH_RULE:
            raise NoPotentialError("basic dynamics needs a policy with a potential")


@dataclass(frozen=True)
class Step:
    job: int
    source: int
    target: int
    cost_before: Fraction
    cost_after: Fraction
    potential_before: Fraction
    potential_after: Fraction

    def to_dict(self) -> dict:
        return {
            "job": self.job, "from": self.source, "to": self.target,
            "cost_before": format_fraction(self.cost_before),
            "cost_after": format_fraction(self.cost_after),
            "potential_before": format_fraction(self.potential_before),
            "potential_after": format_fraction(self.potential_after),
        }


@dataclass
class DynamicsTrace:
    steps: list = field(default_factory=list)
    final_assignment: Optional[Assignment] = None
    converged: bool = False
    step_bound: Optional[float] = None

    def to_dict(self, verbose: bool = True) -> dict:
        out = {
            "num_steps": len(self.steps),
            "final_assignment": self.final_assignment.to_dict() if self.final_assignment else None,
            "converged": self.converged,
            "step_bound": self.step_bound,
        }
        if verbose:
            out["steps"] = [s.to_dict() for s in self.steps]
        return out


@dataclass(frozen=True)
class NashVerdict:
    is_nash: bool
    witness: Optional[tuple] = None  # (job, machine, current cost, deviation cost)

    def __bool__(self):
        return self.is_nash


def potential(instance: Instance, assignment: Sequence[int], policy: Policy) -> Fraction:
    if policy is Policy.SMITH_RULE:
        raise NoPotentialError("SmithRule games have no potential function")
    lam = lambda_term(instance, assignment)
    cost = social_cost(instance, assignment, policy)
    if policy is Policy.APPROX:
        return cost / 2 + lam
    return cost / 2 + lam / 2


def _current_costs(instance, x, groups, policy):
    costs = [ZERO] * instance.num_jobs
    for i, jobs in groups.items():
        for j in jobs:
            costs[j] = job_cost(instance, i, [k for k in jobs if k != j], j, policy)
    return costs


def _best_response(instance, x, groups, job, policy, current):
    here = x[job]
    best_machine, best_cost = here, current
    for i in instance.feasible_machines(job):
        if i == here:
            continue
        cost = job_cost(instance, i, groups.get(i, ()), job, policy)
        if cost < best_cost or (cost == best_cost and best_machine != here and i < best_machine):
            best_machine, best_cost = i, cost
    return best_machine, best_cost


def best_response(instance: Instance, assignment: Sequence[int], job: int,
                  policy: Policy) -> tuple[int, Fraction]:
    """Cheapest machine for ``job`` against the others; ties keep the job in place,
    then go to the lowest index."""
    x = check_assignment(instance, assignment)
    groups = machine_groups(x)
    here = x[job]
    current = job_cost(instance, here, [k for k in groups[here] if k != job], job, policy)
    return _best_response(instance, x, groups, job, policy, current)


def is_nash(instance: Instance, assignment: Sequence[int], policy: Policy) -> NashVerdict:
    x = check_assignment(instance, assignment)
    groups = machine_groups(x)
    for j in range(instance.num_jobs):
        here = x[j]
        current = None
        for i in instance.feasible_machines(j):
            if i == here:
                continue
            if current is None:
                current = job_cost(instance, here, [k for k in groups[here] if k != j], j, policy)
            cost = job_cost(instance, i, groups.get(i, ()), j, policy)
            if cost < current:
                return NashVerdict(False, (j, i, current, cost))
    return NashVerdict(True)


def delta_gap(instance: Instance, assignment: Sequence[int], policy: Policy) -> Fraction:
    """Total best-response regret: sum of current cost minus best-response cost."""
    x = check_assignment(instance, assignment)
    groups = machine_groups(x)
    costs = _current_costs(instance, x, groups, policy)
    return sum((costs[j] - _best_response(instance, x, groups, j, policy, costs[j])[1]
                for j in range(instance.num_jobs)), ZERO)


def basic_dynamics(instance: Instance, config: DynamicsConfig, x0: Sequence[int]) -> DynamicsTrace:
    """Move, one at a time, the job whose best response improves its cost by a
    factor of at least alpha and by the largest absolute amount."""
    policy = config.policy
    x = check_assignment(instance, x0)
    keep = 1 - config.alpha
    trace = DynamicsTrace()
    phi = potential(instance, x, policy)
    phi0 = phi
    while True:
        groups = machine_groups(x)
        costs = _current_costs(instance, x, groups, policy)
        mover = None
        for j in sorted(range(instance.num_jobs), key=lambda j: instance.ids[j]):
            target, new_cost = _best_response(instance, x, groups, j, policy, costs[j])
            if target == x[j] or new_cost > keep * costs[j]:
                continue
            gain = costs[j] - new_cost
            if mover is None or gain > mover[0]:
                mover = (gain, j, target, new_cost)
        if mover is None:
            trace.converged = True
            break
        if len(trace.steps) >= config.max_steps:
            break
        _, j, target, new_cost = mover
        source = x[j]
        x = x.moved(j, target)
        phi_next = potential(instance, x, policy)
        trace.steps.append(Step(j, source, target, costs[j], new_cost, phi, phi_next))
        phi = phi_next
    trace.final_assignment = x
    if phi > 0 and phi0 > 0:
        n = instance.num_jobs
        trace.step_bound = n / float(config.epsilon) * math.log(float(phi0 / phi)) if phi0 > phi else 0.0
        log.info("basic dynamics: %d steps, (n/eps)*log(phi0/phi) = %.3f (constant unspecified)",
                 len(trace.steps), trace.step_bound)
    if not trace.converged:
        log.warning("basic dynamics stopped after %d steps without converging", len(trace.steps))
    return trace


@dataclass(frozen=True)
class ApproxResult:
    assignment: Assignment
    smith_cost: Fraction
    trace: DynamicsTrace

    @property
    def converged(self) -> bool:
        return self.trace.converged


def approx_guarantee(epsilon) -> Fraction:
    """Explicit factor 2/(1 - 4*alpha/3) with alpha = epsilon/2."""
    alpha = Fraction(epsilon) / 2
    return 2 / (1 - Fraction(4, 3) * alpha)


def approx_schedule(instance: Instance, epsilon=Fraction(1, 20), x0: Optional[Sequence[int]] = None,
                    max_steps: int = 100_000) -> ApproxResult:
    """Local search under Approx costs, then schedule each machine by SmithRule."""
    epsilon = Fraction(epsilon)
    config = DynamicsConfig(alpha=epsilon / 2, epsilon=epsilon, max_steps=max_steps,
                            policy=Policy.APPROX)
    if x0 is None:
        # every job on its fastest machine, lowest index on ties
        x0 = [min(instance.feasible_machines(j), key=lambda i: (instance.p(i, j), i))
              for j in range(instance.num_jobs)]
    trace = basic_dynamics(instance, config, x0)
    x = trace.final_assignment
    return ApproxResult(x, social_cost(instance, x, Policy.SMITH_RULE), trace)
