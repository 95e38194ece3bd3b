"""Instance generators for the CLI and the test suites.

Irrational cost values (square roots) are quantized to dyadic rationals
with denominator 2**40 so that the exact-arithmetic pipeline applies
unchanged; the quantization error is below 1e-12 per entry, far inside
every stated tolerance.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction

from .core import INFINITY, Instance, InstanceError, TransportPlan

DYADIC_BITS = 40


def _dyadic(value: float) -> Fraction:
    scale = 1 << DYADIC_BITS
    return Fraction(round(value * scale), scale)


def gen_ap(n: int, a, b) -> Instance:
    """Cyclic two-track instance: cost a on the diagonal, b one step ahead
    (cyclically), infinite elsewhere; uniform weights."""
    if n < 2:
        raise InstanceError("cyclic instance needs n >= 2")
    a, b = Fraction(a), Fraction(b)
    if a < 0 or b < 0:
        raise InstanceError("track costs must be nonnegative")
    cost = [[INFINITY] * n for _ in range(n)]
    for i in range(n):
        cost[i][i] = a
        cost[i][(i + 1) % n] = b
    weight = Fraction(1, n)
    return Instance(
        mu=(weight,) * n, nu=(weight,) * n,
        cost=tuple(tuple(row) for row in cost),
    )


def ap_diagonal_plan(n: int) -> TransportPlan:
    weight = Fraction(1, n)
    mass = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        mass[i][i] = weight
    return TransportPlan(mass=tuple(tuple(row) for row in mass))


def ap_shift_plan(n: int) -> TransportPlan:
    weight = Fraction(1, n)
    mass = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        mass[i][(i + 1) % n] = weight
    return TransportPlan(mass=tuple(tuple(row) for row in mass))


def gen_shift(n: int) -> Instance:
    """Grid version of moving [0,1) to [1,2): squared distance everywhere
    except that the exact unit shift is surcharged to cost 2."""
    if n < 2:
        raise InstanceError("shift instance needs n >= 2")
    xs = [Fraction(i, n) for i in range(n)]
    ys = [1 + Fraction(j, n) for j in range(n)]
    cost = []
    for x in xs:
        row = []
        for y in ys:
            if y - x == 1:
                row.append(Fraction(2))
            else:
                row.append((x - y) ** 2)
        cost.append(tuple(row))
    weight = Fraction(1, n)
    return Instance(mu=(weight,) * n, nu=(weight,) * n, cost=tuple(cost))


def gen_zero_one(n: int) -> Instance:
    """(n+1)-point grid on [0,1]: infinite cost above the diagonal,
    1 - sqrt(x - y) on and below it; uniform weights."""
    if n < 1:
        raise InstanceError("grid instance needs n >= 1")
    cost = []
    for i in range(n + 1):
        row = []
        for j in range(n + 1):
            if j > i:
                row.append(INFINITY)
            else:
                row.append(1 - _dyadic(math.sqrt((i - j) / n)))
        cost.append(tuple(row))
    weight = Fraction(1, n + 1)
    return Instance(
        mu=(weight,) * (n + 1), nu=(weight,) * (n + 1), cost=tuple(cost)
    )


def zero_one_diagonal_plan(n: int) -> TransportPlan:
    weight = Fraction(1, n + 1)
    mass = [[Fraction(0)] * (n + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        mass[i][i] = weight
    return TransportPlan(mass=tuple(tuple(row) for row in mass))


def gen_random(n: int, seed: int, inf_density: float = 0.0,
               denominator: int = 12, spread: int = 2) -> Instance:
    """Seeded uniform-marginal instance with small random rational costs and
    an optional density of infinite entries."""
    if n < 1:
        raise InstanceError("random instance needs n >= 1")
    if not 0 <= inf_density < 1:
        raise InstanceError("inf_density must lie in [0, 1)")
    rng = random.Random(seed)
    cost = []
    for _ in range(n):
        row = []
        for _ in range(n):
            if inf_density and rng.random() < inf_density:
                row.append(INFINITY)
            else:
                row.append(Fraction(rng.randint(0, spread * denominator),
                                    denominator))
        cost.append(tuple(row))
    weight = Fraction(1, n)
    return Instance(mu=(weight,) * n, nu=(weight,) * n, cost=tuple(cost))


def gen_blocks(block_sizes, seed: int, denominator: int = 12,
               spread: int = 2) -> Instance:
    """Block-diagonal instance: random finite costs inside square diagonal
    blocks, infinite cost everywhere else; uniform weights."""
    block_sizes = tuple(int(s) for s in block_sizes)
    if not block_sizes or any(s < 1 for s in block_sizes):
        raise InstanceError("block sizes must be positive")
    total = sum(block_sizes)
    rng = random.Random(seed)
    cost = [[INFINITY] * total for _ in range(total)]
    offset = 0
    for size in block_sizes:
        for i in range(offset, offset + size):
            for j in range(offset, offset + size):
                cost[i][j] = Fraction(
                    rng.randint(0, spread * denominator), denominator
                )
        offset += size
    weight = Fraction(1, total)
    return Instance(
        mu=(weight,) * total, nu=(weight,) * total,
        cost=tuple(tuple(row) for row in cost),
    )


GENERATORS = {
    "ap": "cyclic two-track instance (params: N, a, b)",
    "shift": "surcharged unit-shift grid (params: N)",
    "zero-one": "triangular grid with square-root costs (params: N)",
    "random": "seeded random rational instance (params: N, seed, inf-density)",
}


def generate(name: str, n: int, a=1, b=2, seed: int = 0,
             inf_density: float = 0.0) -> Instance:
    if name == "ap":
        return gen_ap(n, a, b)
    if name == "shift":
        return gen_shift(n)
    if name == "zero-one":
        return gen_zero_one(n)
    if name == "random":
        return gen_random(n, seed, inf_density)
    raise InstanceError(
        f"unknown generator {name!r}; choose from {sorted(GENERATORS)}"
    )
