"""Domain types, instance (de)serialization and instance generators.

Every number that enters a cost is a ``fractions.Fraction``; a forbidden
(job, machine) pair is ``None`` in the dense processing-time view and simply
absent from the per-job maps.
"""

from __future__ import annotations

import enum
import json
import math
import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

FORBIDDEN = None


class InstanceError(ValueError):
    """Base class for malformed instances."""


class ParseError(InstanceError):
    pass


class WeightError(InstanceError):
    pass


class ProcessingTimeError(InstanceError):
    pass


class InfeasibleJobError(InstanceError):
    pass


class AssignmentError(ValueError):
    pass


class GeneratorError(ValueError):
    pass


class Policy(enum.Enum):
    SMITH_RULE = "sr"
    PROPORTIONAL_SHARING = "ps"
    RAND = "rand"
    APPROX = "approx"

    @classmethod
    def parse(cls, text: str) -> "Policy":
        key = text.strip().lower().replace("-", "").replace("_", "")
        aliases = {
            "sr": cls.SMITH_RULE, "smithrule": cls.SMITH_RULE, "smith": cls.SMITH_RULE,
            "shortestfirst": cls.SMITH_RULE, "sf": cls.SMITH_RULE,
            "ps": cls.PROPORTIONAL_SHARING, "proportionalsharing": cls.PROPORTIONAL_SHARING,
            "equalsharing": cls.PROPORTIONAL_SHARING, "es": cls.PROPORTIONAL_SHARING,
            "r": cls.RAND, "rand": cls.RAND,
            "a": cls.APPROX, "approx": cls.APPROX,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown policy {text!r}") from None


def to_fraction(value) -> Fraction:
    """Parse an int, a Fraction or a ``"num/den"`` string exactly."""
    if isinstance(value, bool):
        raise ParseError(f"boolean is not a rational: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"cannot parse rational {value!r}") from None
    raise ParseError(f"expected integer or 'num/den' string, got {value!r}")


def format_fraction(value: Fraction):
    if value.denominator == 1:
        return value.numerator
    return f"{value.numerator}/{value.denominator}"


class Instance:
    """Jobs with weights and per-machine processing times.

    ``proc`` is given densely as ``proc[machine][job]`` (``None`` = forbidden)
    or, through :meth:`from_sparse`, as one ``{machine: time}`` map per job.
    Storage is sparse either way so the tree lower-bound instances stay small.
    """

    __slots__ = ("weights", "ids", "num_machines", "_times", "_rho")

    def __init__(self, weights, proc=None, ids=(), *, times=None, num_machines=None):
        weights = tuple(to_fraction(w) for w in weights)
        n = len(weights)
        if n == 0:
            raise InstanceError("instance has no jobs")
        if times is None:
            if not proc:
                raise InstanceError("instance has no machines")
            if any(len(row) != n for row in proc):
                raise InstanceError("every processing-time row needs one entry per job")
            num_machines = len(proc)
            times = [{} for _ in range(n)]
            for i, row in enumerate(proc):
                for j, p in enumerate(row):
                    if p is not FORBIDDEN:
                        times[j][i] = p
        else:
            if num_machines is None or num_machines < 1:
                raise InstanceError("instance has no machines")
            if len(times) != n:
                raise InstanceError("need one processing-time map per job")
        times = tuple(
            {int(i): to_fraction(p) for i, p in sorted(t.items())} for t in times
        )
        ids = tuple(ids) if ids else tuple(range(n))
        if len(ids) != n or len(set(ids)) != n or any(
            isinstance(i, bool) or not isinstance(i, int) or i < 0 for i in ids
        ):
            raise InstanceError("job ids must be distinct non-negative integers, one per job")
        for j, w in enumerate(weights):
            if w <= 0:
                raise WeightError(f"job {j} has non-positive weight {w}")
        for j, t in enumerate(times):
            if not t:
                raise InfeasibleJobError(f"job {j} has no feasible machine")
            for i, p in t.items():
                if not 0 <= i < num_machines:
                    raise InstanceError(f"job {j} refers to unknown machine {i}")
                if p <= 0:
                    raise ProcessingTimeError(
                        f"processing time of job {j} on machine {i} must be positive, got {p}"
                    )
        self.weights = weights
        self.ids = ids
        self.num_machines = num_machines
        self._times = times
        self._rho = tuple({i: p / weights[j] for i, p in t.items()} for j, t in enumerate(times))

    @classmethod
    def from_sparse(cls, weights, times, num_machines, ids=()):
        return cls(weights, ids=ids, times=times, num_machines=num_machines)

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (self.weights, self.ids, self.num_machines, self._times) == (
            other.weights, other.ids, other.num_machines, other._times)

    def __hash__(self):
        return hash((self.weights, self.ids, self.num_machines))

    def __repr__(self):
        return f"Instance(n={self.num_jobs}, m={self.num_machines})"

    @property
    def num_jobs(self) -> int:
        return len(self.weights)

    def p(self, machine: int, job: int) -> Optional[Fraction]:
        return self._times[job].get(machine)

    def times(self, job: int) -> dict:
        """``{machine: processing time}`` over the job's feasible machines."""
        return self._times[job]

    @property
    def proc(self) -> tuple:
        """Dense ``proc[machine][job]`` view; ``None`` marks forbidden pairs."""
        return tuple(
            tuple(self._times[j].get(i) for j in range(self.num_jobs))
            for i in range(self.num_machines)
        )

    def rho(self, machine: int, job: int) -> Fraction:
        """Processing time over weight."""
        return self._rho[job][machine]

    def feasible(self, machine: int, job: int) -> bool:
        return machine in self._times[job]

    def feasible_machines(self, job: int) -> list[int]:
        return list(self._times[job])

    def smith_key(self, machine: int, job: int):
        return (self._rho[job][machine], self.ids[job])

    @property
    def unit_weights(self) -> bool:
        return all(w == 1 for w in self.weights)

    @property
    def density(self) -> float:
        return sum(len(t) for t in self._times) / (self.num_jobs * self.num_machines)

    def to_dict(self, sparse: Optional[bool] = None) -> dict:
        """JSON form; large sparse instances use ``proc_sparse`` unless told otherwise."""
        if sparse is None:
            sparse = self.num_jobs * self.num_machines > 10 ** 6 and self.density < 0.5
        out = {"weights": [format_fraction(w) for w in self.weights]}
        if sparse:
            out["num_machines"] = self.num_machines
            out["proc_sparse"] = [
                [[i, format_fraction(p)] for i, p in t.items()] for t in self._times
            ]
        else:
            out["proc"] = [
                ["inf" if p is FORBIDDEN else format_fraction(p) for p in row]
                for row in self.proc
            ]
        out["ids"] = list(self.ids)
        return out


class Assignment(tuple):
    """Job -> machine map, stored as a tuple of 0-based machine indices."""

    def __new__(cls, machine_of: Iterable[int] = ()):
        return super().__new__(cls, (int(i) for i in machine_of))

    @property
    def machine_of(self) -> tuple:
        return tuple(self)

    def jobs_on(self, machine: int) -> list[int]:
        return [j for j, i in enumerate(self) if i == machine]

    def groups(self, num_machines: int) -> list[list[int]]:
        out = [[] for _ in range(num_machines)]
        for j, i in enumerate(self):
            out[i].append(j)
        return out

    def moved(self, job: int, machine: int) -> "Assignment":
        lst = list(self)
        lst[job] = machine
        return Assignment(lst)

    def to_dict(self) -> dict:
        return {"machine_of": list(self)}

    def __repr__(self):
        return f"Assignment({list(self)})"


def check_assignment(instance: Instance, assignment: Sequence[int]) -> Assignment:
    """Validate and normalize an assignment for ``instance``."""
    x = assignment if isinstance(assignment, Assignment) else Assignment(assignment)
    if len(x) != instance.num_jobs:
        raise AssignmentError(f"assignment has {len(x)} entries, instance has {instance.num_jobs} jobs")
    for j, i in enumerate(x):
        if not 0 <= i < instance.num_machines:
            raise AssignmentError(f"job {j} assigned to unknown machine {i}")
        if not instance.feasible(i, j):
            raise AssignmentError(f"job {j} assigned to forbidden machine {i}")
    return x


@dataclass(frozen=True)
class CostReport:
    completion: tuple
    weighted_total: Fraction
    lambda_term: Fraction

    def to_dict(self) -> dict:
        return {
            "completion": [format_fraction(c) for c in self.completion],
            "weighted_total": format_fraction(self.weighted_total),
            "lambda": format_fraction(self.lambda_term),
        }


@dataclass(frozen=True)
class LowerBoundBundle:
    instance: Instance
    opt_assignment: Assignment
    nash_assignment: Assignment
    target_ratio: Fraction
    policy: Policy
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "instance": self.instance.to_dict(),
            "opt_assignment": self.opt_assignment.to_dict(),
            "nash_assignment": self.nash_assignment.to_dict(),
            "target_ratio": format_fraction(self.target_ratio),
            "policy": self.policy.value,
            "params": {k: (format_fraction(v) if isinstance(v, Fraction) else v)
                       for k, v in self.params.items()},
        }


# -- serialization ------------------------------------------------------------

def _parse_time(p):
    if isinstance(p, str) and p.strip().lower() in ("inf", "infinity"):
        return FORBIDDEN
    return to_fraction(p)


def instance_from_dict(data) -> Instance:
    if not isinstance(data, dict):
        raise ParseError("instance JSON must be an object")
    if "weights" not in data or ("proc" not in data and "proc_sparse" not in data):
        raise ParseError("instance JSON needs 'weights' and 'proc'")
    weights = data["weights"]
    if not isinstance(weights, list):
        raise ParseError("'weights' must be a list")
    weights = [to_fraction(w) for w in weights]
    ids = tuple(data.get("ids") or ())
    if "proc" in data:
        proc = data["proc"]
        if not isinstance(proc, list) or not all(isinstance(row, list) for row in proc):
            raise ParseError("'proc' must be a list of lists")
        return Instance(weights, [[_parse_time(p) for p in row] for row in proc], ids)
    sparse = data["proc_sparse"]
    try:
        times = [{int(i): _parse_time(p) for i, p in entries} for entries in sparse]
        num_machines = int(data["num_machines"])
    except (KeyError, TypeError, ValueError):
        raise ParseError("'proc_sparse' needs [[machine, time], ...] per job and 'num_machines'") from None
    times = [{i: p for i, p in t.items() if p is not FORBIDDEN} for t in times]
    return Instance.from_sparse(weights, times, num_machines, ids)


def load_instance(raw) -> Instance:
    """Parse the instance JSON schema from bytes or str."""
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    return instance_from_dict(data)


def dump_instance(instance: Instance) -> str:
    return json.dumps(instance.to_dict())


def load_assignment(raw, instance: Optional[Instance] = None) -> Assignment:
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    data = json.loads(raw) if isinstance(raw, str) else raw
    try:
        x = Assignment(data["machine_of"])
    except (KeyError, TypeError, ValueError):
        raise ParseError("assignment JSON must be {'machine_of': [int, ...]}") from None
    if instance is not None:
        check_assignment(instance, x)
    return x


# -- generators ---------------------------------------------------------------

@dataclass(frozen=True)
class RandomBounds:
    """Inclusive numerator/denominator ranges for random rationals."""

    weight_num: tuple = (1, 5)
    weight_den: tuple = (1, 3)
    proc_num: tuple = (1, 10)
    proc_den: tuple = (1, 4)
    forbid_prob: float = 0.0

    def validate(self):
        for name in ("weight_num", "weight_den", "proc_num", "proc_den"):
            lo, hi = getattr(self, name)
            if lo < 1 or hi < lo:
                raise GeneratorError(f"degenerate bounds {name}={lo, hi}")
        if not 0 <= self.forbid_prob < 1:
            raise GeneratorError("forbid_prob must lie in [0, 1)")

    def weight_range(self):
        return (Fraction(self.weight_num[0], self.weight_den[1]),
                Fraction(self.weight_num[1], self.weight_den[0]))

    def proc_range(self):
        return (Fraction(self.proc_num[0], self.proc_den[1]),
                Fraction(self.proc_num[1], self.proc_den[0]))


UNIT_WEIGHTS = RandomBounds(weight_num=(1, 1), weight_den=(1, 1))


def gen_random(n: int, m: int, bounds: RandomBounds = RandomBounds(), seed: int = 0) -> Instance:
    if n < 1 or m < 1:
        raise GeneratorError("need at least one job and one machine")
    bounds.validate()
    rng = random.Random(seed)

    def draw(num, den):
        return Fraction(rng.randint(*num), rng.randint(*den))

    weights = [draw(bounds.weight_num, bounds.weight_den) for _ in range(n)]
    proc = [[draw(bounds.proc_num, bounds.proc_den) for _ in range(n)] for _ in range(m)]
    if bounds.forbid_prob > 0:
        for j in range(n):
            keep = rng.randrange(m)
            for i in range(m):
                if i != keep and rng.random() < bounds.forbid_prob:
                    proc[i][j] = FORBIDDEN
    return Instance(weights, proc)


def random_assignment(instance: Instance, rng: random.Random) -> Assignment:
    return Assignment(rng.choice(instance.feasible_machines(j)) for j in range(instance.num_jobs))


def random_suite(count: int, seed: int, n_range=(2, 5), m_range=(2, 3),
                 bounds: RandomBounds = RandomBounds()) -> list[Instance]:
    """A reproducible list of small random instances."""
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        n = rng.randint(*n_range)
        m = rng.randint(*m_range)
        out.append(gen_random(n, m, bounds, seed=rng.getrandbits(32)))
    return out


def lambda_term(instance: Instance, assignment: Sequence[int]) -> Fraction:
    """Sum over jobs of weight times processing time on the assigned machine."""
    return sum((instance.weights[j] * instance.p(i, j) for j, i in enumerate(assignment)),
               Fraction(0))


def gen_smithrule_lowerbound(k: int, m: int) -> LowerBoundBundle:
    """Groups g_1..g_k of unit jobs on restricted identical machines.

    Group x has m/x^2 jobs; its y-th job may run on machines 1..y.  Jobs with a
    larger y get a smaller id, hence higher priority under SmithRule.
    """
    if k < 1 or m < 1:
        raise GeneratorError("k and m must be positive")
    bad = [x for x in range(1, k + 1) if m % (x * x)]
    if bad:
        raise GeneratorError(f"m={m} is not divisible by x^2 for x in {bad}")
    slots = [(x, y) for x in range(1, k + 1) for y in range(1, m // (x * x) + 1)]
    slots.sort(key=lambda s: (-s[1], s[0]))  # priority order
    n = len(slots)
    times = [{i: Fraction(1) for i in range(y)} for (_, y) in slots]
    instance = Instance.from_sparse((Fraction(1),) * n, times, m, ids=tuple(range(n)))

    opt = Assignment(y - 1 for (_, y) in slots)
    # greedy in priority order: later jobs never delay earlier ones
    load = [0] * m
    nash = []
    for _, y in slots:
        best = min(range(y), key=lambda i: (load[i], i))
        load[best] += 1
        nash.append(best)
    return LowerBoundBundle(instance, opt, Assignment(nash), Fraction(4),
                            Policy.SMITH_RULE, {"k": k, "m": m})


class TreeVariant(enum.Enum):
    DETERMINISTIC_13_6 = "det"
    RAND_5_3 = "rand"


_TREE_PARAMS = {
    TreeVariant.DETERMINISTIC_13_6: (Fraction(3, 2), Fraction(1, 2), Fraction(13, 6),
                                     Policy.PROPORTIONAL_SHARING),
    TreeVariant.RAND_5_3: (Fraction(4, 3), Fraction(2, 3), Fraction(5, 3), Policy.RAND),
}


def gen_tree_lowerbound(depth: int, variant: TreeVariant = TreeVariant.DETERMINISTIC_13_6,
                        delta: Fraction = Fraction(1, 2 ** 20)) -> LowerBoundBundle:
    """Binary tree of the given depth with a chain hanging below every leaf.

    Each arc (child -> parent) is a job that may run on the parent (Nash) or the
    child (optimum); the far end of every chain carries a loop job.  A tree node
    at depth d < depth has processing time b^(depth-1-d), leaves have 1 and a
    chain node at distance k below its leaf has s^k.  The leaf level repeats its
    parents' value: with b^(depth-d) a job sitting with a sibling above a leaf
    would strictly gain by dropping to its leaf, and the stated profile would
    not be an equilibrium.  Machine i is scaled by (1 + delta*i) with i the
    breadth-first index so every tie breaks toward the Nash profile.
    """
    if depth < 1:
        raise GeneratorError("depth must be at least 1")
    b, s, target, policy = _TREE_PARAMS[TreeVariant(variant)]
    delta = Fraction(delta)

    base = []     # unperturbed time per machine, in BFS order
    parent = []   # BFS index of the parent machine, None for the root
    leaves = []
    queue = deque([(None, 0)])
    while queue:
        par, d = queue.popleft()
        idx = len(base)
        base.append(b ** (depth - 1 - d) if d < depth else Fraction(1))
        parent.append(par)
        if d < depth:
            queue.append((idx, d + 1))
            queue.append((idx, d + 1))
        else:
            leaves.append(idx)
    prev = list(leaves)
    for k in range(1, depth + 1):
        for c, above in enumerate(prev):
            idx = len(base)
            base.append(s ** k)
            parent.append(above)
            prev[c] = idx
    endpoints = prev
    m = len(base)
    times = [base[i] * (1 + delta * i) for i in range(m)]

    # one job per non-root machine (its outgoing arc), plus a loop per endpoint
    arcs = [(i, parent[i]) for i in range(m) if parent[i] is not None]
    arcs += [(e, e) for e in endpoints]
    n = len(arcs)
    job_times = [{tail: times[tail], head: times[head]} for tail, head in arcs]
    instance = Instance.from_sparse((Fraction(1),) * n, job_times, m)
    opt = Assignment(tail for tail, _ in arcs)
    nash = Assignment(head for _, head in arcs)
    return LowerBoundBundle(instance, opt, nash, target, policy,
                            {"depth": depth, "variant": TreeVariant(variant).value,
                             "b": b, "s": s, "delta": delta})


def smith_lb_machines(k: int) -> int:
    """Smallest m for which every group of the k-group family is integral."""
    return math.lcm(*range(1, k + 1)) ** 2
