"""Reachability structure of a support: one-step relation, equivalence
classes, and the confinement property of feasible plans.

A support pair p can pass work to p' when the crossing cost
cost(x_of_p', y_of_p) is finite.  Strongly connected components of that
relation partition the support into classes C_i x D_i with mutually
disjoint projections; a support is connecting when there is a single
class.  Any feasible finite-cost plan must keep all its mass inside the
union of the class rectangles, which the confinement check certifies by
maximizing the escaping mass with one solver call.
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
)
from .solver import solve_transport


@dataclass(frozen=True)
class ReachGraph:
    """nodes[i] is a support pair; edges[i] is a tuple of reachable node
    indices (one step)."""

    nodes: tuple
    edges: tuple


@dataclass(frozen=True)
class ConnectivityClass:
    sources: tuple
    targets: tuple
    pairs: tuple


@dataclass(frozen=True)
class ConnectivityDecomposition:
    classes: tuple
    reach_edges: tuple

    def class_of_pair(self, pair):
        for idx, cls in enumerate(self.classes):
            if pair in cls.pairs:
                return idx
        raise KeyError(pair)


@dataclass(frozen=True)
class ConfinementReport:
    feasible: bool
    off_class_mass: object
    witness_plan: tuple | None


def reach_graph(instance: Instance, support_set: SupportSet) -> ReachGraph:
    nodes = tuple(support_set.pairs)
    for x, y in nodes:
        if instance.cost[x][y] is INFINITY:
            raise InstanceError(f"support pair ({x},{y}) has infinite cost")
    edges = []
    for _, y in nodes:
        out = tuple(
            idx
            for idx, (x2, _) in enumerate(nodes)
            if instance.cost[x2][y] is not INFINITY
        )
        edges.append(out)
    return ReachGraph(nodes=nodes, edges=tuple(edges))


def _strongly_connected_components(n, edges):
    """Iterative Tarjan; components returned as sorted index tuples."""
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack = []
    components = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            node, edge_pos = work.pop()
            if edge_pos == 0:
                index[node] = low[node] = counter
                counter += 1
                stack.append(node)
                on_stack[node] = True
            advanced = False
            for pos in range(edge_pos, len(edges[node])):
                succ = edges[node][pos]
                if index[succ] == -1:
                    work.append((node, pos + 1))
                    work.append((succ, 0))
                    advanced = True
                    break
                if on_stack[succ]:
                    low[node] = min(low[node], index[succ])
            if advanced:
                continue
            if low[node] == index[node]:
                component = []
                while True:
                    top = stack.pop()
                    on_stack[top] = False
                    component.append(top)
                    if top == node:
                        break
                components.append(tuple(sorted(component)))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
    return components


def decompose(instance: Instance, support_set: SupportSet) -> ConnectivityDecomposition:
    """Equivalence classes of the mutual-reachability relation.

    Classes are ordered by their smallest source index; sources and targets
    of distinct classes are automatically disjoint because pairs sharing a
    coordinate are mutually reachable through their common finite entry.
    """
    graph = reach_graph(instance, support_set)
    n = len(graph.nodes)
    components = _strongly_connected_components(n, graph.edges)
    classes = []
    for comp in components:
        pairs = tuple(sorted(graph.nodes[idx] for idx in comp))
        sources = tuple(sorted({x for x, _ in pairs}))
        targets = tuple(sorted({y for _, y in pairs}))
        classes.append(
            ConnectivityClass(sources=sources, targets=targets, pairs=pairs)
        )
    classes.sort(key=lambda cls: cls.sources[0])
    seen_sources, seen_targets = set(), set()
    for cls in classes:
        if seen_sources & set(cls.sources) or seen_targets & set(cls.targets):
            raise InstanceError("class projections overlap; support is inconsistent")
        seen_sources.update(cls.sources)
        seen_targets.update(cls.targets)
    reach_edges = tuple(
        (graph.nodes[u], graph.nodes[v])
        for u in range(n)
        for v in graph.edges[u]
    )
    return ConnectivityDecomposition(classes=tuple(classes), reach_edges=reach_edges)


def is_connecting(instance: Instance, support_set: SupportSet) -> bool:
    """True when every support pair reaches every other one.

    Fast path: a cost matrix without infinite entries makes every support
    trivially connecting.
    """
    if len(support_set.pairs) == 0:
        raise InstanceError("empty support")
    if not instance.has_infinite_cost():
        return True
    return len(decompose(instance, support_set).classes) == 1


def check_class_confinement(instance: Instance,
                            decomposition: ConnectivityDecomposition,
                            policy: Policy = RATIONAL) -> ConfinementReport:
    """Maximum feasible mass outside the union of class rectangles.

    Implemented as a single solve with a 0/1 objective: finite arcs inside
    some C_i x D_i cost one unit, finite arcs outside cost nothing, so the
    minimum equals total mass minus the maximal escaping mass.
    """
    inside = set()
    for cls in decomposition.classes:
        for x in cls.sources:
            for y in cls.targets:
                inside.add((x, y))
    one = 1 if policy.exact else 1.0
    objective = tuple(
        tuple(
            INFINITY
            if instance.cost[i][j] is INFINITY
            else (one if (i, j) in inside else 0 * one)
            for j in range(instance.y_size)
        )
        for i in range(instance.x_size)
    )
    solved = solve_transport(instance.mu, instance.nu, objective, policy)
    if solved is None:
        return ConfinementReport(feasible=False, off_class_mass=None, witness_plan=None)
    mass, inside_mass = solved
    total = sum(instance.mu)
    off_mass = total - inside_mass
    witness = mass if off_mass > policy.tolerance else None
    return ConfinementReport(
        feasible=True, off_class_mass=off_mass, witness_plan=witness
    )
