"""Directed-graph utilities shared by the analysis modules.

Graphs are given as adjacency lists over nodes 0..n-1. Everything here is
deterministic: neighbor lists are processed in sorted order and strongly
connected components come out in a fixed order.
"""

from __future__ import annotations


def strongly_connected_components(n: int, adj: list[list[int]]) -> list[list[int]]:
    """Tarjan's algorithm, iterative.

    Returns components as sorted node lists, in reverse topological order of
    the condensation (components with no outgoing cross arcs first).
    """
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    components: list[list[int]] = []
    counter = 0

    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, ei = work[-1]
            if ei == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            neighbors = adj[v]
            while ei < len(neighbors):
                w = neighbors[ei]
                ei += 1
                if index[w] == -1:
                    work[-1] = (v, ei)
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                components.append(sorted(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return components


def condensation_topological_order(
    n: int, adj: list[list[int]]
) -> tuple[list[list[int]], list[int]]:
    """Components in topological order (sources first) plus a node->component map."""
    comps = list(reversed(strongly_connected_components(n, adj)))
    comp_of = [0] * n
    for ci, comp in enumerate(comps):
        for v in comp:
            comp_of[v] = ci
    return comps, comp_of


def has_cycle(n: int, adj: list[list[int]]) -> bool:
    """True if the graph contains any directed cycle (self-loops included)."""
    for v in range(n):
        if v in adj[v]:
            return True
    for comp in strongly_connected_components(n, adj):
        if len(comp) > 1:
            return True
    return False
