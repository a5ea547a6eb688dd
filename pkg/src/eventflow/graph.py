"""Colored directed graphs: the single data model every other module works on.

A graph has a unique entry and exit node, a set of colored (event) nodes and
simple directed edges.  Every edge carries a set of *links*: provenance
triples ``(source_anchor, target_anchor, label)``.  ``None`` in an anchor
slot means "the edge's own endpoint"; contracted strongly connected
components use explicit anchors to remember which member an edge really
leaves from or arrives at.  The visible branch label of an edge is derived
from its links (one distinct label, or ``"merged"``).
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable, Iterator, Optional

from .errors import MalformedGraph, NotFound

NodeId = str
Link = tuple[Optional[NodeId], Optional[NodeId], Optional[str]]

MERGED = "merged"


class NodeKind(str, Enum):
    ENTRY = "entry"
    EXIT = "exit"
    EVENT = "event"
    BRANCH = "branch"
    PLAIN = "plain"
    CONTRACTED = "contracted"


class EventRole(str, Enum):
    FIRST = "first"
    SECOND = "second"
    FLOW = "flow"


def merge_labels(labels: Iterable[Optional[str]]) -> Optional[str]:
    distinct = set(labels)
    if len(distinct) == 1:
        return next(iter(distinct))
    return MERGED


@lru_cache(maxsize=None)
def trivial_links(label: Optional[str] = None) -> frozenset[Link]:
    return frozenset({(None, None, label)})


@dataclass(frozen=True)
class Edge:
    source: NodeId
    target: NodeId
    links: frozenset[Link]

    @property
    def label(self) -> Optional[str]:
        return merge_labels(link[2] for link in self.links)

    @property
    def anchors(self) -> frozenset[NodeId]:
        return frozenset(self.target if d is None else d for _, d, _ in self.links)


_NUM = re.compile(r"(\d+)")


def node_sort_key(node: NodeId) -> tuple:
    """Natural ordering so that ``x2`` sorts before ``x10``."""
    parts = _NUM.split(node)
    return tuple((0, int(p), "") if p.isdigit() else (1, 0, p) for p in parts if p)


class ColoredDirectedGraph:
    """A CFG modelled as G = (V, E, C, entry, exit).

    Construction goes through :meth:`add_node` / :meth:`add_edge`; once a
    graph is handed to an algorithm it is treated as a value and never
    mutated.  Algorithms work on private copies.
    """

    def __init__(self, entry: NodeId = "TOP", exit: NodeId = "BOT", name: str = "cfg") -> None:
        if entry == exit:
            raise MalformedGraph("entry-exit", "entry and exit must be distinct nodes")
        self.name = name
        self._entry = entry
        self._exit = exit
        self._kind: dict[NodeId, NodeKind] = {}
        self._succ: dict[NodeId, dict[NodeId, frozenset[Link]]] = {}
        self._pred: dict[NodeId, dict[NodeId, None]] = {}
        self._event: dict[NodeId, tuple[Optional[str], Optional[EventRole]]] = {}
        self.add_node(entry, NodeKind.ENTRY)
        self.add_node(exit, NodeKind.EXIT)

    # -- construction -------------------------------------------------

    def add_node(
        self,
        node: NodeId,
        kind: NodeKind = NodeKind.PLAIN,
        *,
        role: Optional[EventRole] = None,
        obj: Optional[str] = None,
    ) -> NodeId:
        kind = NodeKind(kind)
        if node in self._kind:
            if node in (self._entry, self._exit) and kind == self._kind[node]:
                return node
            raise MalformedGraph("duplicate-node", f"node {node!r} already exists")
        if kind in (NodeKind.ENTRY, NodeKind.EXIT) and node not in (self._entry, self._exit):
            raise MalformedGraph("entry-exit", f"{node!r} cannot be a second {kind.value} node")
        if (role is not None or obj is not None) and kind != NodeKind.EVENT:
            raise MalformedGraph("event-annotation", f"non-event node {node!r} has an event annotation")
        self._kind[node] = kind
        self._succ[node] = {}
        self._pred[node] = {}
        if kind == NodeKind.EVENT:
            self._event[node] = (obj, EventRole(role) if role is not None else None)
        return node

    def add_edge(
        self,
        source: NodeId,
        target: NodeId,
        label: Optional[str] = None,
        *,
        links: Optional[frozenset[Link]] = None,
    ) -> None:
        """Add ``source -> target``; a repeated pair merges into the existing edge."""
        self._require(source)
        self._require(target)
        if links is None:
            links = trivial_links(label)
        out = self._succ[source]
        existing = out.get(target)
        out[target] = links if existing is None else existing | links
        self._pred[target][source] = None

    # -- basic queries ------------------------------------------------

    @property
    def entry(self) -> NodeId:
        return self._entry

    @property
    def exit(self) -> NodeId:
        return self._exit

    @property
    def nodes(self) -> list[NodeId]:
        return list(self._kind)

    @property
    def colored(self) -> frozenset[NodeId]:
        return frozenset(self._event)

    def __contains__(self, node: object) -> bool:
        return node in self._kind

    def __len__(self) -> int:
        return len(self._kind)

    def _require(self, node: NodeId) -> None:
        if node not in self._kind:
            raise NotFound(f"node {node!r} is not in graph {self.name!r}")

    def kind(self, node: NodeId) -> NodeKind:
        self._require(node)
        return self._kind[node]

    def is_colored(self, node: NodeId) -> bool:
        return node in self._event

    def is_protected(self, node: NodeId) -> bool:
        return node == self._entry or node == self._exit

    def event(self, node: NodeId) -> Optional[tuple[Optional[str], Optional[EventRole]]]:
        self._require(node)
        return self._event.get(node)

    def out_neighbors(self, node: NodeId) -> list[NodeId]:
        """Edge targets of ``node`` including a self-loop, in insertion order."""
        self._require(node)
        return list(self._succ[node])

    def predecessors(self, node: NodeId) -> list[NodeId]:
        self._require(node)
        return list(self._pred[node])

    def out_degree(self, node: NodeId) -> int:
        self._require(node)
        return len(self._succ[node])

    def in_degree(self, node: NodeId) -> int:
        self._require(node)
        return len(self._pred[node])

    def has_edge(self, source: NodeId, target: NodeId) -> bool:
        return source in self._succ and target in self._succ[source]

    def edge(self, source: NodeId, target: NodeId) -> Edge:
        try:
            return Edge(source, target, self._succ[source][target])
        except KeyError:
            raise NotFound(f"edge {source!r} -> {target!r} is not in graph {self.name!r}") from None

    def label(self, source: NodeId, target: NodeId) -> Optional[str]:
        return self.edge(source, target).label

    def edges(self) -> Iterator[Edge]:
        for u, out in self._succ.items():
            for v, links in out.items():
                yield Edge(u, v, links)

    def number_of_edges(self) -> int:
        return sum(len(out) for out in self._succ.values())

    def sorted_nodes(self) -> list[NodeId]:
        inner = sorted((n for n in self._kind if not self.is_protected(n)), key=node_sort_key)
        return [self._entry, *inner, self._exit]

    # -- copying and comparison ---------------------------------------

    def copy(self, name: Optional[str] = None) -> "ColoredDirectedGraph":
        g = ColoredDirectedGraph.__new__(ColoredDirectedGraph)
        g.name = self.name if name is None else name
        g._entry = self._entry
        g._exit = self._exit
        g._kind = dict(self._kind)
        g._succ = {n: dict(out) for n, out in self._succ.items()}
        g._pred = {n: dict(inc) for n, inc in self._pred.items()}
        g._event = dict(self._event)
        return g

    def _state(self) -> tuple:
        return (
            self._entry,
            self._exit,
            {n: (k, self._event.get(n)) for n, k in self._kind.items()},
            {(u, v): links for u, out in self._succ.items() for v, links in out.items()},
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ColoredDirectedGraph):
            return NotImplemented
        return self._state() == other._state()

    __hash__ = None  # type: ignore[assignment]

    def signature(self) -> tuple:
        """Label-level structure: what survives a serialize/parse round trip."""
        nodes = tuple(
            (n, self._kind[n].value, self._event.get(n)) for n in self.sorted_nodes()
        )
        edges = tuple(
            sorted(
                ((e.source, e.target, e.label) for e in self.edges()),
                key=lambda t: (node_sort_key(t[0]), node_sort_key(t[1])),
            )
        )
        return (self._entry, self._exit, nodes, edges)

    def __repr__(self) -> str:
        return (
            f"<ColoredDirectedGraph {self.name!r}: {len(self)} nodes, "
            f"{self.number_of_edges()} edges, {len(self._event)} colored>"
        )

    # -- in-place mutation, used by algorithms on private copies --------

    def _remove_edge(self, source: NodeId, target: NodeId) -> frozenset[Link]:
        links = self._succ[source].pop(target)
        del self._pred[target][source]
        return links

    def _remove_node(self, node: NodeId) -> None:
        for v in list(self._succ[node]):
            self._remove_edge(node, v)
        for u in list(self._pred[node]):
            self._remove_edge(u, node)
        del self._succ[node], self._pred[node], self._kind[node]
        self._event.pop(node, None)


# -- structural queries ------------------------------------------------


def successors_of_node(g: ColoredDirectedGraph, u: NodeId) -> set[NodeId]:
    """suc(u): targets of edges leaving ``u``, a self-loop excluded."""
    return {v for v in g.out_neighbors(u) if v != u}


def successors_of_subgraph(g: ColoredDirectedGraph, members: Iterable[NodeId]) -> set[NodeId]:
    """suc(S): nodes outside S that some member of S has an edge to."""
    s = _members(g, members)
    return {v for u in s for v in g.out_neighbors(u) if v not in s}


def boundary(g: ColoredDirectedGraph, members: Iterable[NodeId]) -> set[NodeId]:
    """Members of S with at least one successor outside S."""
    s = _members(g, members)
    return {u for u in s if any(v not in s for v in g.out_neighbors(u))}


def _members(g: ColoredDirectedGraph, members: Iterable[NodeId]) -> frozenset[NodeId]:
    s = frozenset(members)
    if not s:
        raise ValueError("a subgraph needs at least one member")
    for u in s:
        if u not in g:
            raise NotFound(f"subgraph member {u!r} is not in graph {g.name!r}")
    return s


def reachable(g: ColoredDirectedGraph, start: NodeId, *, reverse: bool = False) -> set[NodeId]:
    adjacency = g._pred if reverse else g._succ
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in adjacency[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def validate(g: ColoredDirectedGraph, *, require_kinds: bool = True) -> None:
    """Raise :class:`MalformedGraph` unless ``g`` is a well-formed input graph.

    ``require_kinds`` additionally enforces that node kinds agree with the
    out-degree (branch nodes fan out, plain nodes do not) which holds for
    ingested CFGs and EFGs but not for intermediate reduction graphs.
    """
    if g.in_degree(g.entry):
        raise MalformedGraph("entry-in-degree", f"entry {g.entry!r} has incoming edges")
    if g.out_degree(g.exit):
        raise MalformedGraph("exit-out-degree", f"exit {g.exit!r} has outgoing edges")
    forward = reachable(g, g.entry)
    backward = reachable(g, g.exit, reverse=True)
    for n in g.sorted_nodes():
        if n not in forward:
            raise MalformedGraph("unreachable", f"node {n!r} is not reachable from the entry")
        if n not in backward:
            raise MalformedGraph("dead-end", f"node {n!r} cannot reach the exit")
        kind = g._kind[n]
        if kind == NodeKind.CONTRACTED:
            raise MalformedGraph("contracted", f"node {n!r} is a contracted component")
        if (kind == NodeKind.EVENT) != g.is_colored(n):
            raise MalformedGraph("color-kind", f"node {n!r}: colored iff kind is event")
        if require_kinds:
            fanout = g.out_degree(n)
            if kind == NodeKind.BRANCH and fanout < 2:
                raise MalformedGraph("branch-fanout", f"branch node {n!r} has {fanout} out-edge(s)")
            if kind == NodeKind.PLAIN and fanout >= 2:
                raise MalformedGraph("plain-fanout", f"plain node {n!r} has {fanout} out-edges")


def fanout_kind(g: ColoredDirectedGraph, node: NodeId) -> NodeKind:
    return NodeKind.BRANCH if g.out_degree(node) >= 2 else NodeKind.PLAIN


def restrict_to_object(g: ColoredDirectedGraph, object_id: Optional[str]) -> ColoredDirectedGraph:
    """Copy of ``g`` in which only the events of ``object_id`` stay colored.

    Other event nodes become ordinary branch or plain nodes, so the EFG is
    built with respect to one object's event set.  ``None`` keeps every
    event colored.
    """
    if object_id is None:
        return g.copy()
    h = g.copy()
    for n, (obj, _role) in list(g._event.items()):
        if obj != object_id:
            del h._event[n]
            h._kind[n] = fanout_kind(g, n)
    return h
