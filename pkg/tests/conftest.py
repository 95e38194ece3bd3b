"""Shared fixtures and independent oracles for the test suite.

The oracles here deliberately avoid the library's own algorithms: cycle
violations are found by exhaustive enumeration, reachability by naive
transitive closure, and feasible plans by randomized greedy filling.
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations, permutations

import pytest

from transport_certify import INFINITY, TransportPlan, make_instance, validate_instance


def frac(a, b=1):
    return Fraction(a, b)


def _convert(v):
    if v is INFINITY or v == "inf":
        return INFINITY
    return Fraction(v)


def build(mu, nu, cost):
    return validate_instance(
        make_instance(
            [Fraction(v) for v in mu],
            [Fraction(v) for v in nu],
            [[_convert(v) for v in row] for row in cost],
        )
    )


def uniform_instance(cost_rows):
    n = len(cost_rows)
    m = len(cost_rows[0])
    return validate_instance(
        make_instance(
            [Fraction(1, n)] * n,
            [Fraction(1, m)] * m,
            [[_convert(v) for v in row] for row in cost_rows],
        )
    )


def permutation_plan(n, perm):
    share = Fraction(1, n)
    mass = [[Fraction(0)] * n for _ in range(n)]
    for i, j in enumerate(perm):
        mass[i][j] = share
    return TransportPlan(mass=tuple(tuple(row) for row in mass))


def exhaustive_violations(instance, pairs):
    """All simple rerouting cycles over the support pairs with a strictly
    positive saving; independent of the exchange-graph machinery.

    Returns a list of (ordered pair tuple, gap).
    """
    found = []
    items = list(pairs)
    for size in range(2, len(items) + 1):
        for subset in combinations(range(len(items)), size):
            first, rest = subset[0], subset[1:]
            for order in permutations(rest):
                cycle = (first,) + order
                direct = Fraction(0)
                reroute = Fraction(0)
                ok = True
                for pos, idx in enumerate(cycle):
                    x, y = items[idx]
                    _, y_next = items[cycle[(pos + 1) % size]]
                    entry = instance.cost[x][y_next]
                    if entry is INFINITY:
                        ok = False
                        break
                    direct += instance.cost[x][y]
                    reroute += entry
                if ok and direct > reroute:
                    found.append(
                        (tuple(items[idx] for idx in cycle), direct - reroute)
                    )
    return found


def reachability_closure(instance, pairs):
    """Naive transitive closure of the one-step hand-over relation."""
    n = len(pairs)
    reach = [[False] * n for _ in range(n)]
    for a, (_, y_a) in enumerate(pairs):
        for b, (x_b, _) in enumerate(pairs):
            if instance.cost[x_b][y_a] is not INFINITY:
                reach[a][b] = True
    for k in range(n):
        for a in range(n):
            if reach[a][k]:
                row_k = reach[k]
                row_a = reach[a]
                for b in range(n):
                    if row_k[b]:
                        row_a[b] = True
    return reach


def random_feasible_plan(instance, rng: random.Random) -> TransportPlan:
    """Greedy filling along a shuffled cell order; feasible whenever every
    cost is finite (all cells usable)."""
    n, m = instance.x_size, instance.y_size
    remaining_mu = list(instance.mu)
    remaining_nu = list(instance.nu)
    cells = [(i, j) for i in range(n) for j in range(m)]
    rng.shuffle(cells)
    mass = [[Fraction(0)] * m for _ in range(n)]
    for i, j in cells:
        amount = min(remaining_mu[i], remaining_nu[j])
        if amount > 0:
            mass[i][j] += amount
            remaining_mu[i] -= amount
            remaining_nu[j] -= amount
    assert all(v == 0 for v in remaining_mu)
    assert all(v == 0 for v in remaining_nu)
    return TransportPlan(mass=tuple(tuple(row) for row in mass))


@pytest.fixture
def square_instance():
    """2x2 zero-diagonal instance reused across the suite."""
    return uniform_instance([[0, 1], [1, 0]])


@pytest.fixture
def rng():
    return random.Random(20260808)
