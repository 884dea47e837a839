"""Exhaustive ground truth for small instances: optimum, pure equilibria, PoA."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

from .core import Assignment, Instance, Policy, format_fraction
from .dynamics import is_nash
from .policies import machine_groups, social_cost

DEFAULT_CAP = 10 ** 7


class StateCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class PoAReport:
    policy: Policy
    opt_cost: Fraction
    opt_assignment: Assignment
    nash_costs: tuple
    worst_ratio: Optional[Fraction]
    enumerated_states: int

    def to_dict(self) -> dict:
        return {
            "policy": self.policy.value,
            "opt_cost": format_fraction(self.opt_cost),
            "opt_assignment": self.opt_assignment.to_dict(),
            "nash_costs": [format_fraction(c) for c in self.nash_costs],
            "worst_ratio": None if self.worst_ratio is None else format_fraction(self.worst_ratio),
            "enumerated_states": self.enumerated_states,
        }


def state_count(instance: Instance) -> int:
    count = 1
    for j in range(instance.num_jobs):
        count *= len(instance.feasible_machines(j))
    return count


def all_assignments(instance: Instance, cap: int = DEFAULT_CAP) -> Iterator[Assignment]:
    """Every feasible assignment, lexicographic in machine_of."""
    states = state_count(instance)
    if states > cap:
        raise StateCapExceeded(f"{states} assignments exceed the cap of {cap}")
    choices = [instance.feasible_machines(j) for j in range(instance.num_jobs)]
    for combo in itertools.product(*choices):
        yield Assignment(combo)


def _smith_cost(instance: Instance, x) -> Fraction:
    # per-machine SmithRule optimum: sort by (rho, id), prefix sums
    total = Fraction(0)
    for i, jobs in machine_groups(x).items():
        t = Fraction(0)
        for j in sorted(jobs, key=lambda j: instance.smith_key(i, j)):
            t += instance.p(i, j)
            total += instance.weights[j] * t
    return total


def brute_force_opt(instance: Instance, cap: int = DEFAULT_CAP) -> tuple[Assignment, Fraction]:
    best = None
    for x in all_assignments(instance, cap):
        cost = _smith_cost(instance, x)
        if best is None or cost < best[1]:
            best = (x, cost)
    return best


def enumerate_pure_nash(instance: Instance, policy: Policy, cap: int = DEFAULT_CAP) -> list[Assignment]:
    return [x for x in all_assignments(instance, cap) if is_nash(instance, x, policy)]


def poa_report(instance: Instance, policy: Policy, cap: int = DEFAULT_CAP) -> PoAReport:
    opt_x, opt = brute_force_opt(instance, cap)
    equilibria = enumerate_pure_nash(instance, policy, cap)
    costs = tuple(social_cost(instance, x, policy) for x in equilibria)
    worst = max(costs) / opt if costs else None
    return PoAReport(policy, opt, opt_x, costs, worst, state_count(instance))
