"""Storage extensions and robust-optimality testing.

A defended extension appends z storage points with zero internal cost and
access tolls max(phi, 0) / max(psi, 0) taken from a strong-monotonicity
certificate; the defended plan ships the original plan plus the identity on
storage.  Against those tolls (or any pointwise-higher ones) the defended
plan stays optimal.  The adversarial search samples random toll matrices at
or above the certified floor when a certificate exists; without one it
samples unconstrained tolls, where a strictly better extended plan
witnesses non-robustness.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .core import (
    INFINITY,
    NEG_INFINITY,
    Instance,
    InstanceError,
    Policy,
    RATIONAL,
    TransportPlan,
    total_cost,
)
from .potentials import CertifyResult, PotentialPair, certify_strong
from .solver import solve_exact


@dataclass(frozen=True)
class ExtendedInstance:
    """Base problem plus storage points: zero cost inside storage, finite
    access tolls, original costs on the original block."""

    base: Instance
    z_size: int
    lam: tuple
    extended_cost: tuple

    def as_instance(self) -> Instance:
        return Instance(
            mu=tuple(self.base.mu) + tuple(self.lam),
            nu=tuple(self.base.nu) + tuple(self.lam),
            cost=self.extended_cost,
        )


@dataclass(frozen=True)
class DefenseReport:
    ok: bool
    gap: object
    z_size: int
    lam: tuple
    certificate: CertifyResult
    extended_value: object
    defended_value: object


@dataclass(frozen=True)
class AdversarialReport:
    trials: int
    seed: int
    max_improvement: object
    improving_trial: int | None
    floored: bool


def _toll(value, zero):
    if value is NEG_INFINITY:
        return zero
    return value if value > zero else zero


def build_extension(instance: Instance, pair: PotentialPair, z_size: int,
                    lam, policy: Policy = RATIONAL) -> ExtendedInstance:
    """Extension with tolls max(phi, 0) into storage and max(psi, 0) out.

    Sources with phi = -inf get zero tolls, keeping every access arc finite.
    """
    lam = tuple(policy.number(v) for v in lam)
    if len(lam) != z_size:
        raise InstanceError(f"lambda has {len(lam)} entries, expected {z_size}")
    for v in lam:
        if v < 0:
            raise InstanceError("storage weights must be nonnegative")
    zero = 0 * (policy.tolerance + 0)
    x_toll = [_toll(pair.phi[x], zero) for x in range(instance.x_size)]
    y_toll = [_toll(pair.psi[y], zero) for y in range(instance.y_size)]
    rows = []
    for x in range(instance.x_size):
        rows.append(tuple(instance.cost[x]) + (x_toll[x],) * z_size)
    for _ in range(z_size):
        rows.append(tuple(y_toll) + (zero,) * z_size)
    return ExtendedInstance(
        base=instance, z_size=z_size, lam=lam, extended_cost=tuple(rows)
    )


def extended_plan(plan: TransportPlan, z_size: int, lam) -> TransportPlan:
    """Original plan plus the identity coupling on storage."""
    lam = tuple(lam)
    y_size = plan.y_size
    rows = [tuple(row) + (0 * sum(lam),) * z_size for row in plan.mass]
    for k in range(z_size):
        storage_row = [0 * lam[k]] * (y_size + z_size)
        storage_row[y_size + k] = lam[k]
        rows.append(tuple(storage_row))
    return TransportPlan(mass=tuple(rows))


def check_robust_defense(instance: Instance, plan: TransportPlan, z_size: int,
                         lam, policy: Policy = RATIONAL) -> DefenseReport:
    """Certify the plan, build the defended extension, and measure the gap
    between the defended plan and the extended optimum (predicted zero).

    Raises when no strong-monotonicity certificate exists, since the
    defense construction is then unavailable.
    """
    certificate = certify_strong(instance, plan, policy)
    if not certificate.ok:
        raise InstanceError(f"not strongly c-monotone: {certificate.reason}")
    lam = tuple(policy.number(v) for v in lam)
    extension = build_extension(instance, certificate.pair, z_size, lam, policy)
    defended = extended_plan(plan, z_size, lam)
    ext_instance = extension.as_instance()
    defended_value = total_cost(ext_instance, defended)
    result = solve_exact(ext_instance, policy)
    if not result.feasible:
        raise InstanceError("extended instance infeasible despite finite tolls")
    gap = defended_value - result.value
    return DefenseReport(
        ok=policy.leq(gap, 0 * gap),
        gap=gap,
        z_size=z_size,
        lam=lam,
        certificate=certificate,
        extended_value=result.value,
        defended_value=defended_value,
    )


def _cost_spread(instance: Instance, policy: Policy):
    finite = instance.finite_cost_values()
    one = 1 if policy.exact else 1.0
    if not finite:
        return one
    spread = max(finite) - min(finite)
    return spread if spread > 0 else one


def _random_increment(rng, spread, policy, granularity=16):
    if policy.exact:
        return Fraction(rng.randint(0, 2 * granularity), granularity) * spread
    return rng.uniform(0.0, 2.0) * spread


def adversarial_search(instance: Instance, plan: TransportPlan, z_size: int,
                       lam, trials: int, seed: int,
                       policy: Policy = RATIONAL) -> AdversarialReport:
    """Sample finite toll matrices and try to beat the defended plan.

    With a strong-monotonicity certificate the sampled tolls stay at or
    above the certified floor; every trial then fails to improve.  Without
    a certificate the tolls are unconstrained in [0, 2 * spread] and a
    positive improvement witnesses non-robustness.
    """
    lam = tuple(policy.number(v) for v in lam)
    plan_value = total_cost(instance, plan)
    if plan_value is INFINITY:
        raise InstanceError("plan has infinite cost")
    zero = 0 * (policy.tolerance + 0)
    certificate = certify_strong(instance, plan, policy)
    if certificate.ok:
        floor_x = [_toll(certificate.pair.phi[x], zero)
                   for x in range(instance.x_size)]
        floor_y = [_toll(certificate.pair.psi[y], zero)
                   for y in range(instance.y_size)]
        floored = True
    else:
        floor_x = [zero] * instance.x_size
        floor_y = [zero] * instance.y_size
        floored = False
    defended = extended_plan(plan, z_size, lam)
    spread = _cost_spread(instance, policy)
    rng = random.Random(seed)
    max_improvement = None
    improving_trial = None
    for trial in range(trials):
        rows = []
        for x in range(instance.x_size):
            tolls = tuple(
                floor_x[x] + _random_increment(rng, spread, policy)
                for _ in range(z_size)
            )
            rows.append(tuple(instance.cost[x]) + tolls)
        for _ in range(z_size):
            tolls = tuple(
                floor_y[y] + _random_increment(rng, spread, policy)
                for y in range(instance.y_size)
            )
            rows.append(tolls + (zero,) * z_size)
        ext_instance = Instance(
            mu=tuple(instance.mu) + lam,
            nu=tuple(instance.nu) + lam,
            cost=tuple(rows),
        )
        defended_value = total_cost(ext_instance, defended)
        result = solve_exact(ext_instance, policy)
        if not result.feasible:
            raise InstanceError("extended instance infeasible despite finite tolls")
        improvement = defended_value - result.value
        if max_improvement is None or improvement > max_improvement:
            max_improvement = improvement
        if improvement > policy.tolerance and improving_trial is None:
            improving_trial = trial
    return AdversarialReport(
        trials=trials,
        seed=seed,
        max_improvement=max_improvement,
        improving_trial=improving_trial,
        floored=floored,
    )
