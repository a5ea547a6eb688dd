"""Random well-formed CFGs for property tests and benchmarks.

Graphs start as the single edge TOP -> BOT and grow by series and parallel
insertions, which keeps every node on an entry-to-exit path without any
rejection sampling.  Back edges to ancestors are added afterwards to
create loops.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .errors import ConfigError
from .graph import ColoredDirectedGraph, EventRole, NodeId, NodeKind

_ARM_LABELS = ("T", "F")


@dataclass(frozen=True)
class GenConfig:
    nodes: tuple[int, int] = (4, 10)
    events: tuple[int, int] = (0, 3)
    branch_probability: float = 0.4
    loop_probability: float = 0.3
    max_back_edges: int = 2
    seed: int = 0
    object_id: str = "p"

    def validate(self) -> None:
        for name in ("nodes", "events"):
            lo, hi = getattr(self, name)
            if lo < 0 or lo > hi:
                raise ConfigError(f"{name} range {lo}..{hi} is empty or negative")
        for name in ("branch_probability", "loop_probability"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {p}")
        if self.max_back_edges < 0:
            raise ConfigError("max_back_edges must be non-negative")
        if self.events[0] > self.nodes[1]:
            raise ConfigError(
                f"cannot place {self.events[0]} events in at most {self.nodes[1]} nodes"
            )


def arm_label(i: int) -> str:
    return _ARM_LABELS[i] if i < len(_ARM_LABELS) else str(i)


def _relabel(g: ColoredDirectedGraph, edges: list[tuple[NodeId, NodeId]]) -> None:
    """Add ``edges`` to ``g`` with branch labels on fan-out edges."""
    fanout: dict[NodeId, list[NodeId]] = {}
    for u, v in edges:
        fanout.setdefault(u, []).append(v)
    for u, targets in fanout.items():
        if len(targets) == 1:
            g.add_edge(u, targets[0])
        else:
            for i, v in enumerate(targets):
                g.add_edge(u, v, arm_label(i))


def generate_cfg(config: GenConfig) -> ColoredDirectedGraph:
    """Seeded random CFG; ``config.nodes`` counts interior nodes (TOP/BOT excluded)."""
    config.validate()
    rng = random.Random(config.seed)
    n = rng.randint(*config.nodes)
    n_events = rng.randint(config.events[0], min(config.events[1], n))

    edges: list[tuple[NodeId, NodeId]] = [("TOP", "BOT")]
    interior: list[NodeId] = []
    for i in range(1, n + 1):
        node = f"n{i}"
        if interior and rng.random() < config.branch_probability:
            # Parallel arm u -> node -> v next to an existing edge, never at TOP.
            candidates = [e for e in edges if e[0] != "TOP"]
            if candidates:
                u, v = rng.choice(candidates)
                edges.append((u, node))
                edges.append((node, v))
                interior.append(node)
                continue
        j = rng.randrange(len(edges))
        u, v = edges[j]
        edges[j] = (u, node)
        edges.append((node, v))
        interior.append(node)

    # Deduplicate (parallel arms over the same pair are possible) while keeping order.
    edges = list(dict.fromkeys(edges))

    ancestors: dict[NodeId, set[NodeId]] = {}
    if interior and config.max_back_edges:
        preds: dict[NodeId, list[NodeId]] = {}
        for u, v in edges:
            preds.setdefault(v, []).append(u)
        for node in interior:
            seen = {node}
            stack = [node]
            while stack:
                x = stack.pop()
                for p in preds.get(x, ()):
                    if p not in seen:
                        seen.add(p)
                        stack.append(p)
            ancestors[node] = seen - {"TOP"}
        present = set(edges)
        for _ in range(config.max_back_edges):
            if rng.random() >= config.loop_probability:
                continue
            a = rng.choice(interior)
            b = rng.choice(sorted(ancestors[a]))
            if (a, b) not in present:
                present.add((a, b))
                edges.append((a, b))

    roles: dict[NodeId, EventRole] = {}
    if n_events:
        chosen = rng.sample(interior, n_events)
        roles[chosen[0]] = EventRole.FIRST
        for node in chosen[1:]:
            roles[node] = rng.choice(list(EventRole))

    out_degree: dict[NodeId, int] = {}
    for u, _ in edges:
        out_degree[u] = out_degree.get(u, 0) + 1
    g = ColoredDirectedGraph("TOP", "BOT", name=f"gen{config.seed}")
    for node in interior:
        if node in roles:
            g.add_node(node, NodeKind.EVENT, role=roles[node], obj=config.object_id)
        elif out_degree.get(node, 0) >= 2:
            g.add_node(node, NodeKind.BRANCH)
        else:
            g.add_node(node, NodeKind.PLAIN)
    _relabel(g, edges)
    return g


def ladder_cfg(rungs: int, events_every: int = 0, name: Optional[str] = None) -> ColoredDirectedGraph:
    """Deterministic benchmark graph with ``4 * rungs + 2`` nodes.

    Each rung is a diamond ``c -> {a, b} -> j``; the join ``j`` either moves
    on to the next rung or loops back to ``c``.  Every ``events_every``-th
    join is an event instead, so reductions have work on both sides of it.
    """
    g = ColoredDirectedGraph("TOP", "BOT", name=name or f"ladder{rungs}")
    joins = []
    for i in range(rungs):
        g.add_node(f"c{i}", NodeKind.BRANCH)
        g.add_node(f"a{i}", NodeKind.PLAIN)
        g.add_node(f"b{i}", NodeKind.PLAIN)
        if events_every and i % events_every == 0:
            g.add_node(f"j{i}", NodeKind.EVENT, role=EventRole.FLOW, obj="p")
        else:
            g.add_node(f"j{i}", NodeKind.BRANCH)
        joins.append(f"j{i}")
    g.add_edge(g.entry, "c0" if rungs else g.exit)
    for i, j in enumerate(joins):
        c = f"c{i}"
        g.add_edge(c, f"a{i}", "T")
        g.add_edge(c, f"b{i}", "F")
        g.add_edge(f"a{i}", j)
        g.add_edge(f"b{i}", j)
        nxt = f"c{i + 1}" if i + 1 < rungs else g.exit
        if g.is_colored(j):
            g.add_edge(j, nxt)
        else:
            g.add_edge(j, nxt, "F")
            g.add_edge(j, c, "T")
    return g
