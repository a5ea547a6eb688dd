"""CFG to event-flow graph (EFG) construction.

The pipeline:

1. reduce the CFG to a T-irreducible graph;
2. condense the subgraph induced by its non-colored nodes into SCCs;
3. put the colored nodes (and entry/exit) back, wiring each contracted
   component to them through the original edges;
4. reduce that colored condensation again, which eliminates every
   contracted component that has a single successor;
5. expand the surviving components back into their member nodes.

Edges rerouted across consumed nodes keep link provenance, so step 5 can
attach each external edge to the exact member it came from.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import OracleTooLarge
from .graph import (
    ColoredDirectedGraph,
    Link,
    NodeId,
    NodeKind,
    node_sort_key,
    trivial_links,
)
from .reduce import ReductionRecord, reduce_in_place, reduce_to_t_irreducible
from .scc import tarjan_scc

DEFAULT_SUBSET_BOUND = 16


@dataclass
class EfgResult:
    efg: ColoredDirectedGraph
    condensed_efg: ColoredDirectedGraph
    t_irreducible: ColoredDirectedGraph
    record: ReductionRecord
    condensed_record: ReductionRecord
    scc_map: dict[NodeId, frozenset[NodeId]]

    @property
    def relevant_branch_nodes(self) -> frozenset[NodeId]:
        g = self.efg
        return frozenset(n for n in g.nodes if not g.is_colored(n) and not g.is_protected(n))

    @property
    def retained_sccs(self) -> list[frozenset[NodeId]]:
        """Contracted components that survived the second reduction."""
        return [self.scc_map[n] for n in self.condensed_efg.nodes if n in self.scc_map]


def _fresh_name(taken: ColoredDirectedGraph, index: int) -> NodeId:
    name = f"scc{index}"
    while name in taken:
        name += "'"
    return name


def _condense(
    g_tirr: ColoredDirectedGraph,
) -> tuple[ColoredDirectedGraph, dict[NodeId, frozenset[NodeId]]]:
    """Steps 2 and 3: the colored condensation graph and its component map."""
    free = [n for n in g_tirr.nodes if not g_tirr.is_colored(n) and not g_tirr.is_protected(n)]
    components = [c for c in tarjan_scc(g_tirr, free) if len(c) > 1]
    components.sort(key=lambda c: min(node_sort_key(n) for n in c))
    rep: dict[NodeId, NodeId] = {}
    scc_map: dict[NodeId, frozenset[NodeId]] = {}
    for i, comp in enumerate(components, start=1):
        name = _fresh_name(g_tirr, i)
        scc_map[name] = comp
        for n in comp:
            rep[n] = name

    ccg = ColoredDirectedGraph(g_tirr.entry, g_tirr.exit, name=g_tirr.name)
    for n in g_tirr.nodes:
        if g_tirr.is_protected(n):
            continue
        if n in rep:
            if rep[n] not in ccg:
                ccg.add_node(rep[n], NodeKind.CONTRACTED)
        else:
            annotation = g_tirr.event(n)
            if annotation is None:
                ccg.add_node(n, g_tirr.kind(n))
            else:
                ccg.add_node(n, g_tirr.kind(n), obj=annotation[0], role=annotation[1])

    for e in g_tirr.edges():
        u, v = e.source, e.target
        cu, cv = rep.get(u, u), rep.get(v, v)
        links: frozenset[Link] = frozenset(
            (
                (a if a is not None else u) if u in rep else None,
                (d if d is not None else v) if v in rep else None,
                label,
            )
            for a, d, label in e.links
        )
        # Internal edges of a component become a contraction self-loop; T2 removes it.
        ccg.add_edge(cu, cv, links=links)
    return ccg, scc_map


def _expand(
    cfg: ColoredDirectedGraph,
    g_tirr: ColoredDirectedGraph,
    cefg: ColoredDirectedGraph,
    scc_map: dict[NodeId, frozenset[NodeId]],
) -> ColoredDirectedGraph:
    """Step 5: replace surviving contracted nodes by their members."""
    keep: set[NodeId] = set()
    for n in cefg.nodes:
        keep.update(scc_map.get(n, (n,)))
    efg = ColoredDirectedGraph(cfg.entry, cfg.exit, name=cfg.name)
    for n in cfg.nodes:
        if n in keep and not cfg.is_protected(n):
            annotation = cfg.event(n)
            if annotation is None:
                efg.add_node(n, cfg.kind(n))
            else:
                efg.add_node(n, cfg.kind(n), obj=annotation[0], role=annotation[1])

    for x in cefg.nodes:
        members = scc_map.get(x)
        if members is None:
            continue
        for u in members:
            for v, links in g_tirr._succ[u].items():
                if v in members:
                    for _, _, label in links:
                        efg.add_edge(u, v, links=trivial_links(label))

    for e in cefg.edges():
        for a, d, label in e.links:
            source = a if a is not None else e.source
            target = d if d is not None else e.target
            efg.add_edge(source, target, links=trivial_links(label))
    return efg


def build_efg(cfg: ColoredDirectedGraph, rng: Optional[random.Random] = None) -> EfgResult:
    """Compute the event-flow graph of ``cfg`` with respect to its colored nodes.

    ``rng`` shuffles the order in which both reductions visit nodes; the
    output is the same for every order.
    """
    g_tirr, record = reduce_to_t_irreducible(cfg, rng)
    ccg, scc_map = _condense(g_tirr)
    cefg = ccg
    condensed_record = reduce_in_place(cefg, rng)
    condensed_record.anchor_map = {(e.source, e.target): e.anchors for e in cefg.edges()}
    efg = _expand(cfg, g_tirr, cefg, scc_map)
    return EfgResult(
        efg=efg,
        condensed_efg=cefg,
        t_irreducible=g_tirr,
        record=record,
        condensed_record=condensed_record,
        scc_map=scc_map,
    )


# -- brute-force subset oracles -------------------------------------------


class _SubsetTable:
    """Bitmask view of the subgraphs of free (non-colored, unprotected) nodes."""

    def __init__(self, g: ColoredDirectedGraph, bound: int) -> None:
        self.free = [n for n in g.sorted_nodes() if not g.is_colored(n) and not g.is_protected(n)]
        if len(self.free) > bound:
            raise OracleTooLarge(
                f"{len(self.free)} non-colored nodes exceed the subset oracle bound of {bound}"
            )
        order = self.free + [n for n in g.sorted_nodes() if n not in set(self.free)]
        self.bit = {n: 1 << i for i, n in enumerate(order)}
        self.width = len(self.free)
        self.succ_mask = [
            sum(self.bit[v] for v in g.out_neighbors(u) if v != u) for u in self.free
        ]
        self.out_mask = [sum(self.bit[v] for v in g.out_neighbors(u)) for u in self.free]
        self.order = order

    def successor_masks(self) -> list[int]:
        """``suc(S)`` as a bitmask for every subset mask ``S`` of free nodes."""
        size = 1 << self.width
        union = [0] * size
        for mask in range(1, size):
            low = mask & -mask
            union[mask] = union[mask ^ low] | self.succ_mask[low.bit_length() - 1]
        return [union[mask] & ~mask for mask in range(size)]

    def nodes(self, mask: int) -> frozenset[NodeId]:
        return frozenset(n for n in self.free if mask & self.bit[n])


def find_irrelevant_branch_nodes_bruteforce(
    g: ColoredDirectedGraph, bound: int = DEFAULT_SUBSET_BOUND
) -> set[NodeId]:
    """Branch nodes ``c`` admitting an event-free subgraph S with a unique successor.

    S ranges over sets of non-colored, unprotected nodes that contain ``c``
    and the targets of all its out-edges.  Exponential in the number of
    such nodes, hence ``bound``.
    """
    table = _SubsetTable(g, bound)
    suc = table.successor_masks()
    free_all = (1 << table.width) - 1
    single_exit = [mask for mask in range(1, 1 << table.width) if suc[mask].bit_count() == 1]
    irrelevant: set[NodeId] = set()
    for i, c in enumerate(table.free):
        if g.out_degree(c) < 2:
            continue
        required = table.out_mask[i] | table.bit[c]
        if required & ~free_all:
            continue
        if any(mask & required == required for mask in single_exit):
            irrelevant.add(c)
    return irrelevant


def subgraphs_with_few_successors(
    g: ColoredDirectedGraph, minimum: int = 2, bound: int = DEFAULT_SUBSET_BOUND
) -> list[frozenset[NodeId]]:
    """Every non-empty subgraph of free nodes with fewer than ``minimum`` successors."""
    table = _SubsetTable(g, bound)
    suc = table.successor_masks()
    return [
        table.nodes(mask)
        for mask in range(1, 1 << table.width)
        if suc[mask].bit_count() < minimum
    ]


def induced_path_edges(
    cfg: ColoredDirectedGraph, keep: Iterable[NodeId]
) -> dict[tuple[NodeId, NodeId], set]:
    """Edges between ``keep`` nodes induced by CFG paths through other nodes.

    Maps ``(a, b)`` to the labels of the first CFG edge of such paths.  A
    self-pair ``(a, a)`` on a non-colored node is left out since looping
    back without meeting an event does not change any trace.  This is a
    direct search used to cross-check :func:`build_efg`.
    """
    kept = set(keep)
    result: dict[tuple[NodeId, NodeId], set] = {}
    for a in kept:
        for first, links in cfg._succ[a].items():
            labels = {link[2] for link in links}
            seen = {first}
            stack = [first]
            while stack:
                u = stack.pop()
                if u in kept:
                    if u != a or cfg.is_colored(a):
                        result.setdefault((a, u), set()).update(labels)
                    continue
                for v in cfg._succ[u]:
                    if v not in seen:
                        seen.add(v)
                        stack.append(v)
    return result
