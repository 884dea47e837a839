"""Unweighted ShortestFirst scheduling as a priority selfish-routing game.

Machine i becomes a path of Q unit arcs with cost x/Q each, ending at the
common sink.  Player j reaches path i through a connector of constant cost
p_ij/2 that joins the path Q*p_ij arcs before its end (times are first
normalised so the largest finite one is 1).  On each path arc the players pay
slices of the area under the cost curve in ShortestFirst order.

The path is never materialised: the arcs used by a set of players are cut
into runs on which the set of users is constant, and each run is priced in
closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import Instance, InstanceError, Policy, check_assignment, format_fraction
from .policies import policy_completion

ZERO = Fraction(0)


@dataclass(frozen=True)
class RoutingInstance:
    num_machines: int
    num_players: int
    scale: Fraction          # original time = normalised time * scale
    q: int                   # arcs per machine path
    entry: tuple             # entry[j] = {machine: arcs from v_ij to the path end}
    connector: tuple         # connector[j] = {machine: constant connector cost}
    priority: tuple          # priority[j] = {machine: sort key on that path}

    def to_dict(self) -> dict:
        """Explicit graph: nodes, arcs with linear costs a*x + b, per-path priorities."""
        nodes = ["t"] + [f"s{j}" for j in range(self.num_players)]
        arcs = []
        for i in range(self.num_machines):
            nodes += [f"P{i}_{k}" for k in range(self.q + 1)]
            for k in range(self.q):
                arcs.append({"from": f"P{i}_{k}", "to": f"P{i}_{k + 1}",
                             "a": format_fraction(Fraction(1, self.q)), "b": 0})
            arcs.append({"from": f"P{i}_{self.q}", "to": "t", "a": 0, "b": 0})
        for j in range(self.num_players):
            for i, length in self.entry[j].items():
                arcs.append({"from": f"s{j}", "to": f"P{i}_{self.q - length}", "a": 0,
                             "b": format_fraction(self.connector[j][i])})
        priorities = {
            f"P{i}": [j for j in sorted(
                (j for j in range(self.num_players) if i in self.priority[j]),
                key=lambda j: self.priority[j][i])]
            for i in range(self.num_machines)
        }
        return {"nodes": nodes, "arcs": arcs, "priorities": priorities,
                "q": self.q, "scale": format_fraction(self.scale)}


def to_priority_routing(instance: Instance) -> RoutingInstance:
    if not instance.unit_weights:
        raise InstanceError("the routing reduction needs unit weights")
    n = instance.num_jobs
    scale = max(p for j in range(n) for p in instance.times(j).values())
    norm = [{i: p / scale for i, p in instance.times(j).items()} for j in range(n)]
    q = math.lcm(*(p.denominator for t in norm for p in t.values()))
    entry = tuple({i: int(p * q) for i, p in t.items()} for t in norm)
    connector = tuple({i: p / 2 for i, p in t.items()} for t in norm)
    priority = tuple({i: (p, instance.ids[j]) for i, p in t.items()} for j, t in enumerate(norm))
    return RoutingInstance(instance.num_machines, n, scale, q, entry, connector, priority)


def routing_costs(routing: RoutingInstance, choice: Sequence[int]) -> list[Fraction]:
    """Cost paid by every player, in normalised time units."""
    costs = [routing.connector[j][i] for j, i in enumerate(choice)]
    users: dict[int, list[int]] = {}
    for j, i in enumerate(choice):
        users.setdefault(i, []).append(j)
    for i, players in users.items():
        ranked = sorted(players, key=lambda j: routing.priority[j][i])
        # arcs are counted back from the sink; player j occupies the last entry[j][i]
        cuts = sorted({routing.entry[j][i] for j in players})
        start = 0
        for end in cuts:
            run = end - start
            on_run = [j for j in ranked if routing.entry[j][i] >= end]
            for rank, j in enumerate(on_run, 1):
                # the rank-th user of an arc with cost x/Q pays the integral over [rank-1, rank]
                costs[j] += run * Fraction(2 * rank - 1, 2 * routing.q)
            start = end
    return costs


def routing_is_nash(routing: RoutingInstance, choice: Sequence[int]) -> bool:
    """No player lowers its routing cost by switching to another machine path."""
    base = routing_costs(routing, choice)
    for j in range(routing.num_players):
        for i in routing.entry[j]:
            if i == choice[j]:
                continue
            alt = list(choice)
            alt[j] = i
            if routing_costs(routing, alt)[j] < base[j]:
                return False
    return True


def equivalence_check(instance: Instance, assignment: Sequence[int]) -> bool:
    """Routing cost of every player equals its ShortestFirst completion time."""
    x = check_assignment(instance, assignment)
    routing = to_priority_routing(instance)
    paid = routing_costs(routing, x)
    completion = policy_completion(instance, x, Policy.SMITH_RULE).completion
    return all(c * routing.scale == cj for c, cj in zip(paid, completion))
