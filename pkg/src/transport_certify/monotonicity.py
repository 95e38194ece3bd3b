"""Cyclical-monotonicity checking and plan improvement.

The exchange graph puts one node on every support pair; the edge from
p = (x, y) to p' = (x', y') weighs cost(x, y') - cost(x, y), the price of
letting x deliver to y' instead of y.  A directed cycle of negative total
weight is exactly a family of support pairs whose rerouting strictly lowers
the transport cost, and executing the reroute at the bottleneck mass yields
a strictly cheaper plan with the same marginals.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import (
    INFINITY,
    Instance,
    InstanceError,
    Policy,
    RATIONAL,
    SupportSet,
    TransportPlan,
    support,
    total_cost,
)


@dataclass(frozen=True)
class ExchangeGraph:
    """nodes[i] is a support pair; edges[i] lists (node index, weight)."""

    nodes: tuple
    edges: tuple

    def cycle_weight(self, node_indices):
        acc = 0
        for pos, u in enumerate(node_indices):
            v = node_indices[(pos + 1) % len(node_indices)]
            weight = dict(self.edges[u]).get(v)
            if weight is None:
                raise InstanceError("cycle uses a missing exchange edge")
            acc += weight
        return acc


@dataclass(frozen=True)
class ViolatingCycle:
    """Ordered support pairs whose rerouting saves ``gap`` per unit mass."""

    pairs: tuple
    gap: object

    def __len__(self):
        return len(self.pairs)


def build_exchange_graph(instance: Instance, support_set: SupportSet) -> ExchangeGraph:
    nodes = tuple(support_set.pairs)
    for x, y in nodes:
        if instance.cost[x][y] is INFINITY:
            raise InstanceError(f"support pair ({x},{y}) has infinite cost")
    edges = []
    for x, y in nodes:
        base = instance.cost[x][y]
        row = instance.cost[x]
        out = []
        for idx, (_, y2) in enumerate(nodes):
            entry = row[y2]
            if entry is not INFINITY:
                out.append((idx, entry - base))
        edges.append(tuple(out))
    return ExchangeGraph(nodes=nodes, edges=tuple(edges))


def _negative_cycle(graph: ExchangeGraph, policy: Policy):
    """Bellman-Ford negative-cycle search; returns node indices or None."""
    n = len(graph.nodes)
    if n == 0:
        return None
    zero = 0 * (policy.tolerance + 0)
    dist = [zero] * n
    parent = [-1] * n
    witness = -1
    for _ in range(n + 1):
        witness = -1
        for u in range(n):
            base = dist[u]
            for v, weight in graph.edges[u]:
                if v == u:
                    continue
                candidate = base + weight
                if candidate < dist[v] - policy.tolerance:
                    dist[v] = candidate
                    parent[v] = u
                    witness = v
        if witness == -1:
            return None
    node = witness
    for _ in range(n):
        node = parent[node]
    cycle = [node]
    walk = parent[node]
    while walk != node:
        cycle.append(walk)
        walk = parent[walk]
    cycle.reverse()
    return cycle


def check_c_monotone(instance: Instance, plan: TransportPlan,
                     policy: Policy = RATIONAL):
    """None when no support cycle can be rerouted at a strict saving;
    otherwise a ViolatingCycle witness with its gap."""
    sup = support(plan, policy=policy)
    graph = build_exchange_graph(instance, sup)
    cycle = _negative_cycle(graph, policy)
    if cycle is None:
        return None
    pairs = tuple(graph.nodes[idx] for idx in cycle)
    gap = -graph.cycle_weight(cycle)
    if not gap > policy.tolerance:
        return None
    return ViolatingCycle(pairs=pairs, gap=gap)


def improve_plan(instance: Instance, plan: TransportPlan,
                 cycle: ViolatingCycle, policy: Policy = RATIONAL) -> TransportPlan:
    """Reroute the bottleneck mass along the cycle.

    Subtracts alpha = min pair mass on every cycle pair and adds it on each
    rerouted pair, so marginals are untouched and the cost drops by exactly
    alpha * gap.
    """
    masses = [plan.mass[x][y] for x, y in cycle.pairs]
    alpha = min(masses)
    if not alpha > policy.support_threshold:
        raise InstanceError("cycle references a pair without positive mass")
    mass = [list(row) for row in plan.mass]
    count = len(cycle.pairs)
    for pos, (x, y) in enumerate(cycle.pairs):
        _, y_next = cycle.pairs[(pos + 1) % count]
        if instance.cost[x][y_next] is INFINITY:
            raise InstanceError("cycle reroutes across an infinite-cost arc")
        mass[x][y] -= alpha
        mass[x][y_next] += alpha
    return TransportPlan(mass=tuple(tuple(row) for row in mass))


def improve_to_monotone(instance: Instance, plan: TransportPlan,
                        max_iters: int | None = None,
                        policy: Policy = RATIONAL):
    """Iterate cycle detection and rerouting until no violation remains.

    Returns (plan, iterations, converged).  The default budget is
    |support|^3; running out is reported, not fatal.
    """
    if max_iters is None:
        max_iters = max(1, len(support(plan, policy=policy)) ** 3)
    current = plan
    for step in range(max_iters):
        cycle = check_c_monotone(instance, current, policy)
        if cycle is None:
            return current, step, True
        before = total_cost(instance, current)
        current = improve_plan(instance, current, cycle, policy)
        after = total_cost(instance, current)
        if not after < before:
            raise InstanceError("rerouting failed to decrease the cost")
    converged = check_c_monotone(instance, current, policy) is None
    return current, max_iters, converged
