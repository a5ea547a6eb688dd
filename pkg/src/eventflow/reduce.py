"""Reduction of a colored graph to a T-irreducible graph.

Three local transformations are applied until none is enabled:

* T1 consumes a non-colored node with a single successor ``m``; its
  predecessors are rewired to ``m``.
* T2 drops the self-loop of a non-colored node.
* T3 consumes a non-colored node whose out-edges all reach one node.  With
  deduplicated edges this is T1 on a node that used to branch, so it is
  recorded separately only for accounting.

Entry and exit are protected and never consumed.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Optional, Union

from .errors import TransformNotApplicable
from .graph import ColoredDirectedGraph, Link, NodeId, NodeKind, node_sort_key


class Transformation(str, Enum):
    T1 = "T1"
    T2 = "T2"
    T3 = "T3"


class Step(NamedTuple):
    kind: Transformation
    consumed: Union[NodeId, tuple[NodeId, NodeId]]
    survivor: Optional[NodeId] = None


@dataclass
class ReductionRecord:
    steps: list[Step] = field(default_factory=list)
    anchor_map: dict[tuple[NodeId, NodeId], frozenset[NodeId]] = field(default_factory=dict)

    def count(self, kind: Transformation) -> int:
        return sum(1 for s in self.steps if s.kind == kind)

    def replay(self, g: ColoredDirectedGraph) -> ColoredDirectedGraph:
        """Re-apply every recorded step to ``g``."""
        work = g.copy()
        for step in self.steps:
            if step.kind == Transformation.T2:
                node = step.consumed[0]  # type: ignore[index]
                _check_t2(work, node)
                _t2(work, node)
            else:
                node = step.consumed  # type: ignore[assignment]
                if _single_target(work, node) != step.survivor:
                    raise TransformNotApplicable(f"replay diverged at {step}")
                _consume(work, node)
        return work


def _compose(first: frozenset[Link], second: frozenset[Link]) -> frozenset[Link]:
    # p -> n -> m collapses to p -> m: keep where the path leaves p and lands in m.
    if len(first) == 1 and len(second) == 1:
        (a, _, label), = first
        (_, d, _), = second
        return frozenset({(a, d, label)})
    return frozenset((a, d, label) for a, _, label in first for _, d, _ in second)


def _consume(g: ColoredDirectedGraph, n: NodeId) -> NodeId:
    out = g._succ.pop(n)
    (m, tail), = out.items()
    del g._pred[m][n]
    for p in g._pred.pop(n):
        p_out = g._succ[p]
        head = p_out.pop(n)
        links = _compose(head, tail)
        existing = p_out.get(m)
        p_out[m] = links if existing is None else existing | links
        g._pred[m][p] = None
    del g._kind[n]
    return m


def _t2(g: ColoredDirectedGraph, n: NodeId) -> None:
    g._remove_edge(n, n)


def _consumable(g: ColoredDirectedGraph, n: NodeId) -> bool:
    return n in g._kind and not g.is_colored(n) and not g.is_protected(n)


def _check_t2(g: ColoredDirectedGraph, n: NodeId) -> None:
    if not _consumable(g, n):
        raise TransformNotApplicable(f"T2 needs a non-colored, unprotected node; got {n!r}")
    if n not in g._succ[n]:
        raise TransformNotApplicable(f"T2: {n!r} has no self-loop")


def _single_target(g: ColoredDirectedGraph, n: NodeId) -> Optional[NodeId]:
    if not _consumable(g, n):
        return None
    out = g._succ[n]
    if len(out) != 1 or n in out:
        return None
    return next(iter(out))


def _consumption_kind(g: ColoredDirectedGraph, n: NodeId) -> Transformation:
    if g._kind[n] in (NodeKind.BRANCH, NodeKind.CONTRACTED):
        return Transformation.T3
    return Transformation.T1


def apply_t1(g: ColoredDirectedGraph, n: NodeId) -> ColoredDirectedGraph:
    """Consume non-colored ``n`` (exactly one successor, no self-loop) into that successor."""
    g._require(n)
    if _single_target(g, n) is None:
        raise TransformNotApplicable(
            f"T1 needs a non-colored, unprotected node with one successor and no self-loop; got {n!r}"
        )
    work = g.copy()
    _consume(work, n)
    return work


def apply_t2(g: ColoredDirectedGraph, n: NodeId) -> ColoredDirectedGraph:
    """Remove the self-loop of non-colored ``n``."""
    g._require(n)
    _check_t2(g, n)
    work = g.copy()
    _t2(work, n)
    return work


def apply_t3(g: ColoredDirectedGraph, n: NodeId) -> ColoredDirectedGraph:
    """Consume a node whose out-edges all point at one node.

    Edges are deduplicated, so the result is the same as :func:`apply_t1`.
    """
    return apply_t1(g, n)


def reverse_postorder(g: ColoredDirectedGraph) -> list[NodeId]:
    """Reverse post-order from the entry, successors visited in insertion order.

    Nodes not reachable from the entry follow in natural order.
    """
    order: list[NodeId] = []
    seen = {g.entry}
    succ = g._succ
    stack = [(g.entry, iter(succ[g.entry]))]
    while stack:
        node, it = stack[-1]
        for v in it:
            if v not in seen:
                seen.add(v)
                stack.append((v, iter(succ[v])))
                break
        else:
            stack.pop()
            order.append(node)
    order.reverse()
    if len(order) < len(g._kind):
        order.extend(sorted((n for n in g._kind if n not in seen), key=node_sort_key))
    return order


class _Worklist:
    """FIFO in RPO by default; uniformly random picks when seeded."""

    def __init__(self, items: list[NodeId], rng: Optional[random.Random]) -> None:
        self._rng = rng
        self._queued = set(items)
        self._items: Union[list[NodeId], deque[NodeId]] = list(items) if rng else deque(items)

    def push(self, item: NodeId) -> None:
        if item not in self._queued:
            self._queued.add(item)
            self._items.append(item)

    def pop(self) -> NodeId:
        items = self._items
        if self._rng is None:
            item = items.popleft()  # type: ignore[union-attr]
        else:
            i = self._rng.randrange(len(items))
            items[i], items[-1] = items[-1], items[i]
            item = items.pop()
        self._queued.discard(item)
        return item

    def __bool__(self) -> bool:
        return bool(self._items)


def reduce_in_place(
    g: ColoredDirectedGraph, rng: Optional[random.Random] = None
) -> ReductionRecord:
    """Drive T1/T2/T3 to a fixpoint on ``g`` itself and return the step log."""
    record = ReductionRecord()
    steps = record.steps
    worklist = _Worklist(reverse_postorder(g), rng)
    kinds = g._kind
    succ = g._succ
    colored = g._event
    protected = (g.entry, g.exit)
    folded = (NodeKind.BRANCH, NodeKind.CONTRACTED)
    T1, T3 = Transformation.T1, Transformation.T3
    while worklist:
        n = worklist.pop()
        if n not in kinds or n in colored or n in protected:
            continue
        out = succ[n]
        if n in out:
            _t2(g, n)
            steps.append(Step(Transformation.T2, (n, n), None))
            worklist.push(n)
            continue
        if len(out) != 1:
            continue
        kind = T3 if kinds[n] in folded else T1
        preds = list(g._pred[n])
        m = _consume(g, n)
        steps.append(Step(kind, n, m))
        for p in preds:
            worklist.push(p)
    return record


def reduce_to_t_irreducible(
    g: ColoredDirectedGraph, rng: Optional[random.Random] = None
) -> tuple[ColoredDirectedGraph, ReductionRecord]:
    """Return the T-irreducible form of ``g`` and the record of how it was reached.

    ``rng`` randomizes the worklist order; the result does not depend on it.
    """
    work = g.copy()
    record = reduce_in_place(work, rng)
    record.anchor_map = {(e.source, e.target): e.anchors for e in work.edges()}
    return work, record


def is_t_irreducible(g: ColoredDirectedGraph) -> bool:
    for n in g._kind:
        if not _consumable(g, n):
            continue
        out = g._succ[n]
        if n in out or len(out) == 1:
            return False
    return True
