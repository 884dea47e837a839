"""Named, seeded instance suites and the row-producing runs behind the CLI."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .core import UNIT_WEIGHTS, Instance, Policy, RandomBounds, random_suite
from .dynamics import approx_schedule, basic_dynamics
from .oracle import brute_force_opt, poa_report

CSV_COLUMNS = ("instance_id", "policy", "opt", "cost", "ratio", "steps")

PS_BOUND = (3 + math.sqrt(5)) / 2
POA_BOUNDS = {
    "sr": 4.0,
    "ps": PS_BOUND,
    "ps-unit": 2.5,
    "rand": 32 / 15,
    "approx": 4.0,
}


@dataclass(frozen=True)
class Suite:
    name: str
    count: int
    n_range: tuple
    m_range: tuple
    bounds: RandomBounds = RandomBounds()

    def instances(self, seed: int) -> list[Instance]:
        return random_suite(self.count, seed, self.n_range, self.m_range, self.bounds)


SUITES = {
    "small200": Suite("small200", 200, (2, 5), (2, 3)),
    "small200-unit": Suite("small200-unit", 200, (2, 5), (2, 3), UNIT_WEIGHTS),
    "small100": Suite("small100", 100, (3, 7), (2, 3)),
    "tiny20": Suite("tiny20", 20, (2, 4), (2, 3)),
}


def default_seed() -> int:
    return int(os.environ.get("COORDMECH_SEED", "0"))


def _poa_row(args):
    idx, instance, policy = args
    rep = poa_report(instance, policy)
    worst = max(rep.nash_costs) if rep.nash_costs else None
    return {
        "instance_id": idx,
        "policy": policy.value,
        "opt": rep.opt_cost,
        "cost": worst,
        "ratio": rep.worst_ratio,
        "steps": "",
    }


def _approx_row(args):
    idx, instance, epsilon = args
    res = approx_schedule(instance, epsilon)
    _, opt = brute_force_opt(instance)
    return {
        "instance_id": idx,
        "policy": Policy.APPROX.value,
        "opt": opt,
        "cost": res.smith_cost,
        "ratio": res.smith_cost / opt,
        "steps": len(res.trace.steps),
        "converged": res.converged,
    }


def _run(fn: Callable, tasks: list, jobs: int) -> list[dict]:
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        rows = [fn(t) for t in tasks]
    return sorted(rows, key=lambda r: r["instance_id"])


def poa_rows(instances: list[Instance], policy: Policy, jobs: int = 1) -> list[dict]:
    return _run(_poa_row, [(i, inst, policy) for i, inst in enumerate(instances)], jobs)


def approx_rows(instances: list[Instance], epsilon=Fraction(1, 20), jobs: int = 1) -> list[dict]:
    return _run(_approx_row, [(i, inst, Fraction(epsilon)) for i, inst in enumerate(instances)], jobs)


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, Fraction):
        return str(value) if value.denominator != 1 else str(value.numerator)
    return str(value)
