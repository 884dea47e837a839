"""Inner-product images of an assignment and the cost identities they give.

Two maps are used.  The step profile sends machine i to the function
``f_i(y) = sum of w_j over jobs on i with rho_ij >= y``; its L2 norm prices
SmithRule and ProportionalSharing.  The signature sends machine i to the
sparse vector ``u^i_r = total weight of jobs on i with rho_ij = r``; under the
kernel ``M_rs = rs/(r+s)`` its norm prices Rand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import Instance, Policy, check_assignment, format_fraction, lambda_term
from .policies import machine_groups, social_cost

ZERO = Fraction(0)


@dataclass(frozen=True)
class StepProfile:
    """Per machine, ascending breakpoints ``(r, f(r))``.

    ``f`` is constant on each interval ``[r_prev, r)`` and zero from the last
    breakpoint on.
    """

    machines: dict

    def value(self, machine: int, y) -> Fraction:
        y = Fraction(y)
        for r, height in self.machines.get(machine, ()):
            if y < r:
                return height
        return ZERO


@dataclass(frozen=True)
class Signature:
    machines: dict  # machine -> {rho: total weight}


@dataclass(frozen=True)
class IdentityReport:
    c_sr: Fraction
    c_ps: Fraction
    c_r: Fraction
    c_a: Fraction
    lambda_term: Fraction
    phi_norm_sq: Fraction
    kernel_norm_sq: Fraction
    checks: dict

    @property
    def all_identities_hold(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        out = {k: format_fraction(getattr(self, k)) for k in
               ("c_sr", "c_ps", "c_r", "c_a", "lambda_term", "phi_norm_sq", "kernel_norm_sq")}
        out["checks"] = dict(self.checks)
        out["all_identities_hold"] = self.all_identities_hold
        return out


def step_profile(instance: Instance, assignment: Sequence[int]) -> StepProfile:
    x = check_assignment(instance, assignment)
    machines = {}
    for i, jobs in machine_groups(x).items():
        by_rho: dict[Fraction, Fraction] = {}
        for j in jobs:
            r = instance.rho(i, j)
            by_rho[r] = by_rho.get(r, ZERO) + instance.weights[j]
        points = []
        height = ZERO
        for r in sorted(by_rho, reverse=True):
            height += by_rho[r]
            points.append((r, height))
        points.reverse()
        machines[i] = tuple(points)
    return StepProfile(machines)


def _integrate_product(a, b) -> Fraction:
    """Integral of the product of two single-machine step functions."""
    cuts = sorted({r for r, _ in a} | {r for r, _ in b})
    total = ZERO
    ia = ib = 0
    left = ZERO
    for r in cuts:
        while ia < len(a) and a[ia][0] < r:
            ia += 1
        while ib < len(b) and b[ib][0] < r:
            ib += 1
        fa = a[ia][1] if ia < len(a) else ZERO
        fb = b[ib][1] if ib < len(b) else ZERO
        total += fa * fb * (r - left)
        left = r
    return total


def l2_inner(a: StepProfile, b: StepProfile) -> Fraction:
    total = ZERO
    for i in a.machines.keys() & b.machines.keys():
        total += _integrate_product(a.machines[i], b.machines[i])
    return total


def signature(instance: Instance, assignment: Sequence[int]) -> Signature:
    x = check_assignment(instance, assignment)
    machines = {}
    for i, jobs in machine_groups(x).items():
        u: dict[Fraction, Fraction] = {}
        for j in jobs:
            r = instance.rho(i, j)
            u[r] = u.get(r, ZERO) + instance.weights[j]
        machines[i] = u
    return Signature(machines)


def kernel_entry(r, s) -> Fraction:
    r, s = Fraction(r), Fraction(s)
    if r + s == 0:
        return ZERO
    return r * s / (r + s)


def kernel_apply(u: dict, r) -> Fraction:
    """``(M u)_r`` for a sparse single-machine signature ``u``."""
    return sum((weight * kernel_entry(r, s) for s, weight in u.items()), ZERO)


def kernel_inner(a: Signature, b: Signature) -> Fraction:
    if a is b:
        return _kernel_norm_sq(a)
    total = ZERO
    for i in a.machines.keys() & b.machines.keys():
        for r, ur in a.machines[i].items():
            total += ur * kernel_apply(b.machines[i], r)
    return total


def _kernel_norm_sq(u: Signature) -> Fraction:
    # symmetric kernel: diagonal r/2 plus twice the upper triangle
    total = ZERO
    for weights in u.machines.values():
        items = list(weights.items())
        for idx, (r, ur) in enumerate(items):
            total += ur * ur * r / 2
            for s, us in items[idx + 1:]:
                total += 2 * ur * us * r * s / (r + s)
    return total


def rand_cost_from_signature(instance: Instance, assignment: Sequence[int], job: int) -> Fraction:
    """Expected Rand completion of an assigned job as ``(M u)_rho + p/2``."""
    i = assignment[job]
    u = signature(instance, assignment).machines[i]
    return kernel_apply(u, instance.rho(i, job)) + instance.p(i, job) / 2


def kernel_matrix(kappa: int) -> list[list[Fraction]]:
    return [[Fraction(r * s, r + s) for s in range(1, kappa + 1)] for r in range(1, kappa + 1)]


def leading_minors(matrix: list[list[Fraction]]) -> list[Fraction]:
    """Leading principal minors via exact Gaussian elimination without pivoting.

    Stops early (returning the minors found so far plus a non-positive one)
    as soon as a pivot vanishes.
    """
    a = [row[:] for row in matrix]
    n = len(a)
    minors = []
    det = Fraction(1)
    for k in range(n):
        pivot = a[k][k]
        det *= pivot
        minors.append(det)
        if pivot == 0:
            break
        for r in range(k + 1, n):
            factor = a[r][k] / pivot
            if factor:
                for c in range(k, n):
                    a[r][c] -= factor * a[k][c]
    return minors


def kernel_pd_check(kappa: int) -> tuple[bool, list[Fraction]]:
    if not 1 <= kappa <= 40:
        raise ValueError("kappa must lie in 1..40")
    minors = leading_minors(kernel_matrix(kappa))
    return len(minors) == kappa and all(d > 0 for d in minors), minors


def chung_sums(points) -> tuple:
    """The two double sums ``sum u_r u_s rs/(r+s)`` and ``sum u_r u_s min(r, s)``.

    Exact when every coordinate is an int or Fraction, floats otherwise.
    """
    pts = list(points)
    if not pts:
        raise ValueError("need at least one point")
    if any(r <= 0 or u <= 0 for r, u in pts):
        raise ValueError("points must be positive")
    exact = all(isinstance(v, (int, Fraction)) for pt in pts for v in pt)
    if exact:
        pts = [(Fraction(r), Fraction(u)) for r, u in pts]
        kern = sum((ur * us * kernel_entry(r, s) for r, ur in pts for s, us in pts), ZERO)
        smith = sum((ur * us * min(r, s) for r, ur in pts for s, us in pts), ZERO)
        return kern, smith
    r = np.array([float(p[0]) for p in pts])
    u = np.array([float(p[1]) for p in pts])
    rr, ss = np.meshgrid(r, r, indexing="ij")
    uu = np.outer(u, u)
    kern = math.fsum((uu * rr * ss / (rr + ss)).ravel())
    smith = math.fsum((uu * np.minimum(rr, ss)).ravel())
    return kern, smith


def chung_ratio(points) -> float:
    kern, smith = chung_sums(points)
    if isinstance(kern, Fraction):
        return float(kern / smith)
    return kern / smith


def chung_tight_family(n_max: int) -> list[float]:
    """Ratios for r_j = 1/j^2, u_j = 1 and n = 1..n_max, built incrementally."""
    ratios = []
    kern = smith = 0.0
    r = 1.0 / np.arange(1, n_max + 1, dtype=float) ** 2
    for n in range(n_max):
        prev = r[:n]
        rn = r[n]
        kern += 2 * math.fsum(prev * rn / (prev + rn)) + rn / 2
        smith += 2 * math.fsum(np.minimum(prev, rn)) + rn
        ratios.append(kern / smith)
    return ratios


def lemma_ineq_holds(k: int, k_star: int) -> bool:
    """k*(k+1) <= k^2/3 + (5/3) k*(k*+1)/2, cleared of denominators."""
    return 6 * k_star * (k + 1) <= 2 * k * k + 5 * k_star * (k_star + 1)


def lemma_ineq_check(max_k: int) -> bool:
    if max_k < 0:
        raise ValueError("max_k must be non-negative")
    return all(lemma_ineq_holds(k, ks) for k in range(max_k + 1) for ks in range(max_k + 1))


def direct_cross_term(instance: Instance, x, x_star) -> Fraction:
    """sum_i sum_{j on i in x*} sum_{k on i in x} w_j w_k min(rho_ij, rho_ik)."""
    total = ZERO
    groups = machine_groups(x)
    for j, i in enumerate(x_star):
        for k in groups.get(i, ()):
            total += instance.weights[j] * instance.weights[k] * min(
                instance.rho(i, j), instance.rho(i, k))
    return total


def cost_identity_report(instance: Instance, assignment: Sequence[int]) -> IdentityReport:
    x = check_assignment(instance, assignment)
    c_sr = social_cost(instance, x, Policy.SMITH_RULE)
    c_ps = social_cost(instance, x, Policy.PROPORTIONAL_SHARING)
    c_r = social_cost(instance, x, Policy.RAND)
    c_a = social_cost(instance, x, Policy.APPROX)
    lam = lambda_term(instance, x)
    phi = step_profile(instance, x)
    phi_sq = l2_inner(phi, phi)
    u = signature(instance, x)
    kern_sq = kernel_inner(u, u)
    checks = {
        "smith_rule": c_sr == phi_sq / 2 + lam / 2,
        "proportional_sharing": c_ps == phi_sq,
        "rand": c_r == kern_sq + lam / 2,
        "approx": c_a == 2 * c_sr,
        "rand_crude_bound": c_r <= 2 * c_sr - lam,
    }
    return IdentityReport(c_sr, c_ps, c_r, c_a, lam, phi_sq, kern_sq, checks)
