"""Command-line front end.

    coordmech gen random --n 5 --m 3 --seed 1 -o inst.json
    coordmech gen smith-lb --k 3 --m 36
    coordmech gen tree-lb --depth 12 --variant det
    coordmech eval inst.json --policy ps [--assignment x.json] [--identities]
    coordmech dynamics inst.json --policy ps --alpha 1/100 --epsilon 1/20
    coordmech approx inst.json --epsilon 1/20 | approx --suite small100
    coordmech poa --policy sr --suite small200 [--jobs 4]
    coordmech check --lemma-ineq 500 --pd 25
    coordmech report --out reports/

Exit status is 0 iff every requested check passes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import core, geometry, oracle, reduction, suites
from .core import Assignment, Policy, TreeVariant
from .dynamics import (DynamicsConfig, approx_guarantee, approx_schedule, basic_dynamics,
                       delta_gap, is_nash, potential)
from .policies import policy_completion, social_cost

log = logging.getLogger("coordmech")


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _policy(text: str) -> Policy:
    try:
        return Policy.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _emit(text: str, out):
    if out in (None, "-"):
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text if text.endswith("\n") else text + "\n")


def _dump(obj, out):
    _emit(json.dumps(obj, indent=2, sort_keys=False), out)


def _read_input(path):
    """Instance plus an optional assignment, from an instance or a bundle file."""
    data = json.loads(Path(path).read_text())
    if "instance" in data:
        inst = core.instance_from_dict(data["instance"])
        x = data.get("nash_assignment")
        return inst, (Assignment(x["machine_of"]) if x else None)
    return core.instance_from_dict(data), None


def _fastest(instance):
    return Assignment(min(instance.feasible_machines(j), key=lambda i: (instance.p(i, j), i))
                      for j in range(instance.num_jobs))


def _assignment(args, instance, fallback):
    if getattr(args, "assignment", None):
        return core.load_assignment(Path(args.assignment).read_text(), instance)
    return fallback if fallback is not None else _fastest(instance)


def _csv(rows, extra=()):
    buf = io.StringIO()
    cols = list(suites.CSV_COLUMNS) + [c for c in extra if c not in suites.CSV_COLUMNS]
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for row in rows:
        writer.writerow([suites.format_cell(row.get(c)) for c in cols])
    return buf.getvalue()


# -- gen -------------------------------------------------------------------------

def cmd_gen(args) -> int:
    if args.kind == "random":
        bounds = core.UNIT_WEIGHTS if args.unit_weights else core.RandomBounds()
        if args.forbid_prob:
            bounds = core.RandomBounds(bounds.weight_num, bounds.weight_den,
                                       bounds.proc_num, bounds.proc_den, args.forbid_prob)
        inst = core.gen_random(args.n, args.m, bounds, seed=args.seed)
        _dump(inst.to_dict(), args.output)
        return 0
    if args.kind == "smith-lb":
        bundle = core.gen_smithrule_lowerbound(args.k, args.m)
    else:
        bundle = core.gen_tree_lowerbound(args.depth, TreeVariant(args.variant), args.delta)
    _dump(bundle.to_dict(), args.output)
    return 0


# -- eval ------------------------------------------------------------------------

def cmd_eval(args) -> int:
    inst, fallback = _read_input(args.instance)
    x = _assignment(args, inst, fallback)
    if args.identities:
        rep = geometry.cost_identity_report(inst, x)
        _dump(rep.to_dict(), args.output)
        return 0 if rep.all_identities_hold else 1
    out = policy_completion(inst, x, args.policy).to_dict()
    out["policy"] = args.policy.value
    out["assignment"] = list(x)
    _dump(out, args.output)
    return 0


# -- dynamics / approx -----------------------------------------------------------

def cmd_dynamics(args) -> int:
    inst, fallback = _read_input(args.instance)
    x0 = _assignment(args, inst, fallback)
    config = DynamicsConfig(args.alpha, args.epsilon, args.max_steps, args.policy)
    trace = basic_dynamics(inst, config, x0)
    out = trace.to_dict(verbose=args.verbose)
    final = trace.final_assignment
    out["is_nash"] = bool(is_nash(inst, final, args.policy))
    out["delta_gap"] = core.format_fraction(delta_gap(inst, final, args.policy))
    out["potential"] = core.format_fraction(potential(inst, final, args.policy))
    _dump(out, args.output)
    return 0 if trace.converged else 1


def cmd_approx(args) -> int:
    if args.suite:
        instances = suites.SUITES[args.suite].instances(args.seed)
        rows = suites.approx_rows(instances, args.epsilon, args.jobs)
        _emit(_csv(rows, extra=("converged",)), args.output)
        bound = approx_guarantee(args.epsilon)
        ok = all(r["converged"] and r["ratio"] <= bound for r in rows)
        mean = sum(float(r["ratio"]) for r in rows) / len(rows)
        log.info("mean ratio %.4f, max %.4f, guarantee %.4f", mean,
                 max(float(r["ratio"]) for r in rows), float(bound))
        return 0 if ok else 1
    inst, fallback = _read_input(args.instance)
    x0 = _assignment(args, inst, None) if args.assignment else None
    res = approx_schedule(inst, args.epsilon, x0, args.max_steps)
    out = {
        "assignment": list(res.assignment),
        "smith_cost": core.format_fraction(res.smith_cost),
        "steps": len(res.trace.steps),
        "converged": res.converged,
        "guarantee": core.format_fraction(approx_guarantee(args.epsilon)),
    }
    if oracle.state_count(inst) <= args.cap:
        _, opt = oracle.brute_force_opt(inst, args.cap)
        out["opt"] = core.format_fraction(opt)
        out["ratio"] = core.format_fraction(res.smith_cost / opt)
    _dump(out, args.output)
    return 0 if res.converged else 1


# -- poa -------------------------------------------------------------------------

def cmd_poa(args) -> int:
    if args.instance:
        inst, _ = _read_input(args.instance)
        instances = [inst]
    else:
        instances = suites.SUITES[args.suite].instances(args.seed)
    rows = suites.poa_rows(instances, args.policy, args.jobs)
    _emit(_csv(rows), args.output)
    unit = args.suite and suites.SUITES[args.suite].bounds == core.UNIT_WEIGHTS
    key = "ps-unit" if unit and args.policy is Policy.PROPORTIONAL_SHARING else args.policy.value
    bound = suites.POA_BOUNDS[key]
    worst = max((float(r["ratio"]) for r in rows if r["ratio"] is not None), default=None)
    log.info("max ratio %s against bound %.6f", worst, bound)
    return 0 if worst is None or worst <= bound + 1e-12 else 1


# -- check -----------------------------------------------------------------------

def _identity_sweep(count, per, seed):
    rng = random.Random(seed)
    for inst in core.random_suite(count, seed, (1, 10), (1, 4)):
        for _ in range(per):
            x = core.random_assignment(inst, rng)
            if not geometry.cost_identity_report(inst, x).all_identities_hold:
                return False
    return True


def _potential_sweep(moves, seed):
    rng = random.Random(seed)
    instances = core.random_suite(50, seed, (2, 6), (2, 3))
    for step in range(moves):
        inst = instances[step % len(instances)]
        x = core.random_assignment(inst, rng)
        j = rng.randrange(inst.num_jobs)
        target = rng.choice(inst.feasible_machines(j))
        y = x.moved(j, target)
        for policy in (Policy.PROPORTIONAL_SHARING, Policy.RAND, Policy.APPROX):
            dphi = potential(inst, y, policy) - potential(inst, x, policy)
            before = policy_completion(inst, x, policy)
            after = policy_completion(inst, y, policy)
            w = inst.weights[j]
            if dphi != w * (after.completion[j] - before.completion[j]):
                return False
    return True


def _reduction_sweep(count, per, seed):
    rng = random.Random(seed)
    for inst in core.random_suite(count, seed, (1, 6), (1, 3), core.UNIT_WEIGHTS):
        for _ in range(per):
            if not reduction.equivalence_check(inst, core.random_assignment(inst, rng)):
                return False
    return True


def cmd_check(args) -> int:
    results = []

    def record(name, ok, started):
        results.append(ok)
        print(f"{'PASS' if ok else 'FAIL'}  {name}  ({time.perf_counter() - started:.2f}s)")

    if args.lemma_ineq is not None:
        t = time.perf_counter()
        record(f"lemma-ineq max_k={args.lemma_ineq}", geometry.lemma_ineq_check(args.lemma_ineq), t)
    if args.pd is not None:
        t = time.perf_counter()
        ok, _ = geometry.kernel_pd_check(args.pd)
        record(f"kernel positive definite kappa={args.pd}", ok, t)
    if args.chung is not None:
        t = time.perf_counter()
        ratios = geometry.chung_tight_family(args.chung)
        ok = all(r < math.pi / 4 for r in ratios) and all(
            b > a for a, b in zip(ratios, ratios[1:]))
        record(f"chung tight family n<={args.chung} (final {ratios[-1]:.6f})", ok, t)
    if args.identities is not None:
        t = time.perf_counter()
        record(f"cost identities on {args.identities} instances",
               _identity_sweep(args.identities, 20, args.seed), t)
    if args.potential is not None:
        t = time.perf_counter()
        record(f"exact potentials over {args.potential} moves", _potential_sweep(args.potential, args.seed), t)
    if args.reduction is not None:
        t = time.perf_counter()
        record(f"routing equivalence on {args.reduction} instances",
               _reduction_sweep(args.reduction, 10, args.seed), t)
    if not results:
        print("no checks requested", file=sys.stderr)
        return 2
    return 0 if all(results) else 1


# -- report ----------------------------------------------------------------------

def cmd_report(args) -> int:
    """CSV tables plus PNG figures for the PoA suites, Approx, Chung and lower bounds."""
    from . import plotting

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ok = True

    ratios, bounds = {}, {}
    runs = [("sr", "small200", Policy.SMITH_RULE), ("ps", "small200", Policy.PROPORTIONAL_SHARING),
            ("ps-unit", "small200-unit", Policy.PROPORTIONAL_SHARING), ("rand", "small200", Policy.RAND)]
    for label, suite, policy in runs:
        instances = suites.SUITES[suite].instances(args.seed)[: args.limit]
        rows = suites.poa_rows(instances, policy, args.jobs)
        (out / f"poa_{label}.csv").write_text(_csv(rows))
        ratios[label] = [r["ratio"] for r in rows]
        bounds[label] = suites.POA_BOUNDS[label]
        ok &= all(r is None or float(r) <= bounds[label] + 1e-12 for r in ratios[label])
    plotting.ratio_histogram(ratios, bounds, out / "poa_ratios.png")

    instances = suites.SUITES["small100"].instances(args.seed)[: args.limit]
    rows = suites.approx_rows(instances, args.epsilon, args.jobs)
    (out / "approx.csv").write_text(_csv(rows, extra=("converged",)))
    guarantee = float(approx_guarantee(args.epsilon))
    ok &= all(r["converged"] and float(r["ratio"]) <= guarantee for r in rows)
    plotting.ratio_histogram({"approx": [r["ratio"] for r in rows]}, {"approx": guarantee},
                             out / "approx_ratios.png", title="Approx local search / optimum")

    chung = geometry.chung_tight_family(args.chung)
    with open(out / "chung.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["n", "ratio"])
        writer.writerows((n, repr(r)) for n, r in enumerate(chung, 1))
    plotting.trend({"r_j = 1/j^2": (list(range(1, len(chung) + 1)), chung)}, out / "chung.png",
                   xlabel="n", targets={"r_j = 1/j^2": math.pi / 4})

    lb_rows = []
    for k in range(1, args.smith_k + 1):
        m = core.smith_lb_machines(k)
        b = core.gen_smithrule_lowerbound(k, m)
        lb_rows.append(("smith-lb", k, _bundle_ratio(b)))
    for depth in range(1, args.tree_depth + 1):
        for variant in TreeVariant:
            b = core.gen_tree_lowerbound(depth, variant)
            lb_rows.append((f"tree-{variant.value}", depth, _bundle_ratio(b)))
    with open(out / "lower_bounds.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["family", "size", "ratio"])
        writer.writerows((f, s, suites.format_cell(r)) for f, s, r in lb_rows)
    series = {}
    for fam, size, r in lb_rows:
        series.setdefault(fam, ([], []))
        series[fam][0].append(size)
        series[fam][1].append(r)
    plotting.trend(series, out / "lower_bounds.png", xlabel="k (smith-lb) / depth (tree)",
                   targets={"smith-lb": 4, "tree-det": Fraction(13, 6), "tree-rand": Fraction(5, 3)})
    print(f"report written to {out}")
    return 0 if ok else 1


def _bundle_ratio(bundle):
    nash = social_cost(bundle.instance, bundle.nash_assignment, bundle.policy)
    opt = social_cost(bundle.instance, bundle.opt_assignment, Policy.SMITH_RULE)
    return nash / opt


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    seed = suites.default_seed()
    p = argparse.ArgumentParser(prog="coordmech", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose-log", action="store_true", help="log at INFO level")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an instance or lower-bound bundle")
    gsub = g.add_subparsers(dest="kind", required=True)
    r = gsub.add_parser("random")
    r.add_argument("--n", type=int, required=True)
    r.add_argument("--m", type=int, required=True)
    r.add_argument("--seed", type=int, default=seed)
    r.add_argument("--unit-weights", action="store_true")
    r.add_argument("--forbid-prob", type=float, default=0.0)
    s = gsub.add_parser("smith-lb")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    t = gsub.add_parser("tree-lb")
    t.add_argument("--depth", type=int, required=True)
    t.add_argument("--variant", choices=[v.value for v in TreeVariant], default="det")
    t.add_argument("--delta", type=_fraction, default=Fraction(1, 2 ** 20))
    for q in (r, s, t):
        q.add_argument("-o", "--output")
        q.set_defaults(func=cmd_gen)

    e = sub.add_parser("eval", help="completion times or cost identities of an assignment")
    e.add_argument("instance")
    e.add_argument("--assignment")
    e.add_argument("--policy", type=_policy, default=Policy.SMITH_RULE)
    e.add_argument("--identities", action="store_true")
    e.add_argument("-o", "--output")
    e.set_defaults(func=cmd_eval)

    d = sub.add_parser("dynamics", help="basic best-response dynamics")
    d.add_argument("instance")
    d.add_argument("--assignment", help="initial assignment (default: fastest machines)")
    d.add_argument("--policy", type=_policy, default=Policy.PROPORTIONAL_SHARING)
    d.add_argument("--alpha", type=_fraction, default=Fraction(1, 100))
    d.add_argument("--epsilon", type=_fraction, default=Fraction(1, 20))
    d.add_argument("--max-steps", type=int, default=100_000)
    d.add_argument("--verbose", action="store_true", help="include every step in the trace")
    d.add_argument("-o", "--output")
    d.set_defaults(func=cmd_dynamics)

    a = sub.add_parser("approx", help="(2+eps)-approximation by Approx local search")
    a.add_argument("instance", nargs="?")
    a.add_argument("--assignment")
    a.add_argument("--suite", choices=sorted(suites.SUITES))
    a.add_argument("--epsilon", type=_fraction, default=Fraction(1, 20))
    a.add_argument("--max-steps", type=int, default=100_000)
    a.add_argument("--cap", type=int, default=10 ** 6)
    a.add_argument("--seed", type=int, default=seed)
    a.add_argument("--jobs", type=int, default=1)
    a.add_argument("-o", "--output")
    a.set_defaults(func=cmd_approx)

    o = sub.add_parser("poa", help="exhaustive price-of-anarchy rows as CSV")
    o.add_argument("instance", nargs="?")
    o.add_argument("--policy", type=_policy, default=Policy.SMITH_RULE)
    o.add_argument("--suite", choices=sorted(suites.SUITES), default="small200")
    o.add_argument("--seed", type=int, default=seed)
    o.add_argument("--jobs", type=int, default=1)
    o.add_argument("-o", "--output")
    o.set_defaults(func=cmd_poa)

    c = sub.add_parser("check", help="run invariant suites")
    c.add_argument("--lemma-ineq", type=int, metavar="MAX_K")
    c.add_argument("--pd", type=int, metavar="KAPPA")
    c.add_argument("--chung", type=int, metavar="N")
    c.add_argument("--identities", type=int, metavar="INSTANCES")
    c.add_argument("--potential", type=int, metavar="MOVES")
    c.add_argument("--reduction", type=int, metavar="INSTANCES")
    c.add_argument("--seed", type=int, default=seed)
    c.set_defaults(func=cmd_check)

    rp = sub.add_parser("report", help="CSV tables and PNG figures")
    rp.add_argument("--out", required=True)
    rp.add_argument("--seed", type=int, default=seed)
    rp.add_argument("--epsilon", type=_fraction, default=Fraction(1, 20))
    rp.add_argument("--limit", type=int, default=None, help="instances per suite")
    rp.add_argument("--chung", type=int, default=200)
    rp.add_argument("--smith-k", type=int, default=4)
    rp.add_argument("--tree-depth", type=int, default=8)
    rp.add_argument("--jobs", type=int, default=1)
    rp.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose_log else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "approx" and not args.suite and not args.instance:
        parser.error("approx needs an instance file or --suite")
    try:
        return args.func(args)
    except (core.InstanceError, core.AssignmentError, core.GeneratorError,
            oracle.StateCapExceeded, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
