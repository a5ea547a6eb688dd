"""Tarjan's strongly connected components, iterative so deep graphs do not hit the recursion limit."""

from __future__ import annotations

from typing import Callable, Hashable, Iterable, TypeVar

from .graph import ColoredDirectedGraph, NodeId

T = TypeVar("T", bound=Hashable)


def strongly_connected_components(
    vertices: Iterable[T], neighbours: Callable[[T], Iterable[T]]
) -> list[frozenset[T]]:
    """Components in reverse topological order (sinks first).

    Only vertices in ``vertices`` are considered; neighbours outside that
    set are ignored, which gives the components of the induced subgraph.
    """
    members = list(vertices)
    inside = set(members)
    index: dict[T, int] = {}
    lowlink: dict[T, int] = {}
    on_stack: set[T] = set()
    stack: list[T] = []
    result: list[frozenset[T]] = []
    counter = 0

    for root in members:
        if root in index:
            continue
        index[root] = lowlink[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        work = [(root, iter(neighbours(root)))]
        while work:
            v, it = work[-1]
            descended = False
            for w in it:
                if w not in inside:
                    continue
                if w not in index:
                    index[w] = lowlink[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(neighbours(w))))
                    descended = True
                    break
                if w in on_stack and index[w] < lowlink[v]:
                    lowlink[v] = index[w]
            if descended:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                if lowlink[v] < lowlink[parent]:
                    lowlink[parent] = lowlink[v]
            if lowlink[v] == index[v]:
                component = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    component.append(w)
                    if w == v:
                        break
                result.append(frozenset(component))
    return result


def tarjan_scc(g: ColoredDirectedGraph, nodes: Iterable[NodeId]) -> list[frozenset[NodeId]]:
    """SCCs of the subgraph of ``g`` induced by ``nodes``."""
    node_list = list(nodes)
    for n in node_list:
        g._require(n)
    return strongly_connected_components(node_list, lambda n: g._succ[n])
