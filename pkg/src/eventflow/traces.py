"""Bounded path enumeration, event-trace projection and equivalence classes.

Paths are enumerated between *relevant* nodes.  A path is a sequence of
transitions ``r -> r2`` between relevant nodes; each transition is realised
by a simple segment through non-relevant nodes.  The budget ``k`` bounds how
often the same transition ``(r, r2)`` may be taken.  With every node relevant
(``relevant=None``) a transition is a single edge and this is the usual
"each edge at most k times" budget.

A segment that leaves a non-colored node and comes back to it without
meeting another relevant node is not a transition at all: looping there
does not change the projected trace.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Optional

from .errors import OracleTooLarge
from .graph import ColoredDirectedGraph, NodeId, merge_labels, node_sort_key

DEFAULT_MAX_PATHS = 1_000_000


class TraceRole(str, Enum):
    ENTRY = "entry"
    EXIT = "exit"
    EVENT = "event"
    BRANCH = "relevant_branch"


@dataclass(frozen=True)
class TraceItem:
    node: NodeId
    role: TraceRole
    label: Optional[str] = None

    def __str__(self) -> str:
        if self.role is TraceRole.ENTRY:
            text = "TOP"
        elif self.role is TraceRole.EXIT:
            text = "BOT"
        else:
            text = self.node
        return text if self.label is None else f"{text}[{self.label}]"


@dataclass(frozen=True)
class EventTrace:
    items: tuple[TraceItem, ...]

    def __str__(self) -> str:
        return " ".join(str(item) for item in self.items)

    @property
    def nodes(self) -> tuple[NodeId, ...]:
        return tuple(item.node for item in self.items)

    def conditions(self) -> list[tuple[NodeId, str]]:
        """Interior items that record which way execution left them."""
        return [
            (item.node, item.label)
            for item in self.items[1:-1]
            if item.label is not None
        ]


@dataclass(frozen=True)
class BoundedPath:
    nodes: tuple[NodeId, ...]
    back_edge_budget: int = 1


@dataclass(frozen=True)
class EquivalenceClass:
    trace: EventTrace
    member_count: int


def _role(g: ColoredDirectedGraph, node: NodeId) -> TraceRole:
    if node == g.entry:
        return TraceRole.ENTRY
    if node == g.exit:
        return TraceRole.EXIT
    if g.is_colored(node):
        return TraceRole.EVENT
    return TraceRole.BRANCH


def make_trace(
    g: ColoredDirectedGraph, nodes: Iterable[NodeId], labels: Iterable[Optional[str]]
) -> EventTrace:
    """Trace for a relevant-node sequence; ``labels[i]`` belongs to ``nodes[i]``."""
    return EventTrace(
        tuple(TraceItem(n, _role(g, n), label) for n, label in zip(nodes, labels))
    )


def project_to_event_trace(
    g: ColoredDirectedGraph,
    path: BoundedPath | Iterable[NodeId],
    relevant: Optional[Iterable[NodeId]] = None,
) -> EventTrace:
    """Restrict a path to entry, exit and ``relevant`` nodes.

    Each kept node carries the label of the edge the path took out of it.
    Consecutive visits to the same non-colored node (a loop through
    irrelevant nodes only) collapse to the last visit.
    """
    nodes = path.nodes if isinstance(path, BoundedPath) else tuple(path)
    keep = set(g.nodes) if relevant is None else set(relevant) | {g.entry, g.exit}
    kept: list[NodeId] = []
    labels: list[Optional[str]] = []
    for i, n in enumerate(nodes):
        if n not in keep:
            continue
        label = g.label(n, nodes[i + 1]) if i + 1 < len(nodes) else None
        if kept and kept[-1] == n and not g.is_colored(n):
            labels[-1] = label
            continue
        kept.append(n)
        labels.append(label)
    return make_trace(g, kept, labels)


# -- segment tables ------------------------------------------------------


@dataclass
class SegmentTable:
    """For each relevant node, the simple segments to the next relevant node.

    ``segments[r][r2]`` lists ``(interior, label)`` pairs: the non-relevant
    nodes walked through and the label of the first edge.
    """

    relevant: frozenset[NodeId]
    segments: dict[NodeId, dict[NodeId, list[tuple[tuple[NodeId, ...], Optional[str]]]]] = field(
        default_factory=dict
    )

    def targets(self, r: NodeId) -> list[NodeId]:
        return sorted(self.segments.get(r, {}), key=node_sort_key)


def segment_table(
    g: ColoredDirectedGraph,
    relevant: Optional[Iterable[NodeId]] = None,
    max_paths: int = DEFAULT_MAX_PATHS,
) -> SegmentTable:
    if relevant is None:
        rel = frozenset(g.nodes)
    else:
        rel = frozenset(relevant) | {g.entry, g.exit}
    table = SegmentTable(rel)
    total = 0
    for r in rel:
        out: dict[NodeId, list] = {}
        for first in sorted(g.out_neighbors(r), key=node_sort_key):
            label = g.label(r, first)
            # Iterative DFS over simple paths through non-relevant nodes.
            stack: list[tuple[NodeId, tuple[NodeId, ...]]] = [(first, ())]
            while stack:
                u, interior = stack.pop()
                if u in rel:
                    if u == r and not g.is_colored(r):
                        continue
                    out.setdefault(u, []).append((interior, label))
                    total += 1
                    if total > max_paths:
                        raise OracleTooLarge(f"more than {max_paths} segments between relevant nodes")
                    continue
                if u in interior:
                    continue
                walked = interior + (u,)
                for v in sorted(g.out_neighbors(u), key=node_sort_key, reverse=True):
                    stack.append((v, walked))
        table.segments[r] = out
    return table


def _walk_transitions(
    g: ColoredDirectedGraph, table: SegmentTable, k: int, max_paths: int
) -> Iterator[tuple[NodeId, ...]]:
    """Relevant-node sequences from entry to exit, each transition used ≤ k times."""
    if k < 1:
        raise ValueError("the budget k must be at least 1")
    used: dict[tuple[NodeId, NodeId], int] = {}
    seq = [g.entry]
    stack = [iter(table.targets(g.entry))]
    emitted = 0
    while stack:
        nxt = next(stack[-1], None)
        if nxt is None:
            stack.pop()
            top = seq.pop()
            if seq:
                key = (seq[-1], top)
                used[key] -= 1
            continue
        key = (seq[-1], nxt)
        if used.get(key, 0) >= k:
            continue
        used[key] = used.get(key, 0) + 1
        seq.append(nxt)
        if nxt == g.exit:
            emitted += 1
            if emitted > max_paths:
                raise OracleTooLarge(f"more than {max_paths} bounded paths")
            yield tuple(seq)
            seq.pop()
            used[key] -= 1
            continue
        stack.append(iter(table.targets(nxt)))


def enumerate_bounded_paths(
    g: ColoredDirectedGraph,
    k: int = 1,
    relevant: Optional[Iterable[NodeId]] = None,
    max_paths: int = DEFAULT_MAX_PATHS,
) -> list[BoundedPath]:
    """Every bounded entry-to-exit path of ``g``, in deterministic order.

    With ``relevant`` given, transitions between relevant nodes are
    budgeted and each is expanded into every one of its segments.
    """
    table = segment_table(g, relevant, max_paths)
    paths: list[BoundedPath] = []
    for seq in _walk_transitions(g, table, k, max_paths):
        partial: list[tuple[NodeId, ...]] = [(seq[0],)]
        for a, b in zip(seq, seq[1:]):
            options = table.segments[a][b]
            partial = [p + interior + (b,) for p in partial for interior, _ in options]
            if len(paths) + len(partial) > max_paths:
                raise OracleTooLarge(f"more than {max_paths} bounded paths")
        paths.extend(BoundedPath(p, k) for p in partial)
    return paths


def _class_of(
    g: ColoredDirectedGraph, table: SegmentTable, seq: tuple[NodeId, ...]
) -> EquivalenceClass:
    count = 1
    labels: list[Optional[str]] = []
    for a, b in zip(seq, seq[1:]):
        options = table.segments[a][b]
        count *= len(options)
        labels.append(merge_labels(label for _, label in options))
    labels.append(None)
    return EquivalenceClass(make_trace(g, seq, labels), count)


def equivalence_classes(
    g: ColoredDirectedGraph,
    k: int = 1,
    relevant: Optional[Iterable[NodeId]] = None,
    max_paths: int = DEFAULT_MAX_PATHS,
) -> list[EquivalenceClass]:
    """Group the bounded paths of ``g`` by event trace.

    ``relevant`` defaults to the node set of the event-flow graph of ``g``.
    Labels are merged across the members of a class, position by position.
    Classes are sorted by their rendered trace.
    """
    if relevant is None:
        from .efg import build_efg

        relevant = build_efg(g).efg.nodes
    table = segment_table(g, relevant, max_paths)
    classes = [_class_of(g, table, seq) for seq in _walk_transitions(g, table, k, max_paths)]
    classes.sort(key=lambda c: str(c.trace))
    return classes


def group_paths(
    g: ColoredDirectedGraph, paths: Iterable[BoundedPath], relevant: Iterable[NodeId]
) -> dict[tuple[NodeId, ...], list[EventTrace]]:
    """Explicit grouping of raw paths by projected node sequence (oracle helper)."""
    rel = set(relevant)
    groups: dict[tuple[NodeId, ...], list[EventTrace]] = {}
    for p in paths:
        trace = project_to_event_trace(g, p, rel)
        groups.setdefault(trace.nodes, []).append(trace)
    return groups


def efg_traces(
    efg: ColoredDirectedGraph, k: int = 1, max_paths: int = DEFAULT_MAX_PATHS
) -> list[EventTrace]:
    """Traces of every bounded path of an event-flow graph (every node relevant)."""
    return [c.trace for c in equivalence_classes(efg, k, efg.nodes, max_paths)]


@dataclass
class BijectionReport:
    ok: bool
    cfg_classes: list[EquivalenceClass]
    efg_traces: list[EventTrace]
    missing_in_efg: list[str]
    extra_in_efg: list[str]

    @property
    def diff(self) -> list[str]:
        return [f"- {t}" for t in self.missing_in_efg] + [f"+ {t}" for t in self.extra_in_efg]

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "cfg_classes": [
                {"trace": str(c.trace), "member_count": c.member_count} for c in self.cfg_classes
            ],
            "efg_traces": [str(t) for t in self.efg_traces],
            "diff": self.diff,
        }


def verify_bijection(
    cfg: ColoredDirectedGraph, k: int = 1, max_paths: int = DEFAULT_MAX_PATHS, efg=None
) -> BijectionReport:
    """Compare CFG equivalence classes with the paths of its event-flow graph.

    ``efg`` may be passed to test a graph other than the one computed here.
    """
    if efg is None:
        from .efg import build_efg

        efg = build_efg(cfg).efg
    classes = equivalence_classes(cfg, k, efg.nodes, max_paths)
    on_efg = efg_traces(efg, k, max_paths)
    left = {str(c.trace) for c in classes}
    right = {str(t) for t in on_efg}
    return BijectionReport(
        ok=left == right and len(on_efg) == len(right),
        cfg_classes=classes,
        efg_traces=on_efg,
        missing_in_efg=sorted(left - right),
        extra_in_efg=sorted(right - left),
    )
