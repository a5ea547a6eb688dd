"""Two-event property checking (lock must be followed by unlock).

The checker runs on an event-flow graph.  A node's effect on the tracked
object is a function on three states:

    NONE  --first-->  HELD  --second-->  NONE
    HELD  --flow--->  ESCAPED

A path that reaches the exit HELD is a violation; one that reaches it
ESCAPED handed the object to somebody else while it was held, and the
verdict is "escapes" (unless some other path is a plain violation).

Witnesses are paths of the product of the graph with the state machine
in which every (edge, state) pair is used at most once, so a loop shows
up at most once per state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Optional

from .errors import OracleTooLarge, SpecMismatch
from .graph import ColoredDirectedGraph, EventRole, NodeId, merge_labels, node_sort_key
from .traces import DEFAULT_MAX_PATHS, EventTrace, SegmentTable, make_trace, segment_table

DEFAULT_WITNESS_LIMIT = 1000


class State(str, Enum):
    NONE = "none_held"
    HELD = "held"
    ESCAPED = "escaped"


class Status(str, Enum):
    SAFE = "safe"
    VIOLATION = "violation"
    ESCAPES = "escapes"


@dataclass(frozen=True)
class EventSpec:
    object_id: str
    events: dict[NodeId, EventRole]

    def role(self, node: NodeId) -> Optional[EventRole]:
        return self.events.get(node)


@dataclass(frozen=True)
class Witness:
    trace: EventTrace
    conditions: tuple[tuple[NodeId, str], ...]

    def to_dict(self) -> dict:
        return {
            "trace": str(self.trace),
            "conditions": [{"node": n, "label": label} for n, label in self.conditions],
        }


@dataclass
class Verdict:
    object_id: str
    status: Status
    witnesses: list[Witness] = field(default_factory=list)
    truncated: bool = False

    def traces(self) -> set[str]:
        return {str(w.trace) for w in self.witnesses}

    def to_dict(self) -> dict:
        return {
            "object": self.object_id,
            "status": self.status.value,
            "witnesses": [w.to_dict() for w in self.witnesses],
            "truncated": self.truncated,
        }


def step(state: State, role: Optional[EventRole]) -> State:
    if role is EventRole.FIRST:
        return State.HELD
    if role is EventRole.SECOND:
        return State.NONE
    if role is EventRole.FLOW and state is State.HELD:
        return State.ESCAPED
    return state


def specs_from_graph(g: ColoredDirectedGraph) -> list[EventSpec]:
    """One spec per object named by the graph's event annotations."""
    grouped: dict[str, dict[NodeId, EventRole]] = {}
    for n in g.sorted_nodes():
        annotation = g.event(n)
        if annotation is None:
            continue
        obj, role = annotation
        if obj is None or role is None:
            continue
        grouped.setdefault(obj, {})[n] = role
    return [
        EventSpec(obj, events)
        for obj, events in sorted(grouped.items())
        if EventRole.FIRST in events.values()
    ]


def _check_spec(g: ColoredDirectedGraph, spec: EventSpec) -> None:
    if EventRole.FIRST not in spec.events.values():
        raise SpecMismatch(f"spec for {spec.object_id!r} has no first event")
    for n in spec.events:
        if n not in g:
            raise SpecMismatch(f"spec for {spec.object_id!r} names {n!r}, which is not in the graph")
        if not g.is_colored(n):
            raise SpecMismatch(f"spec for {spec.object_id!r} names {n!r}, which is not an event node")


def _status(exit_states: Iterable[State]) -> tuple[Status, Optional[State]]:
    states = set(exit_states)
    if State.HELD in states:
        return Status.VIOLATION, State.HELD
    if State.ESCAPED in states:
        return Status.ESCAPES, State.ESCAPED
    return Status.SAFE, None


def _witness(trace: EventTrace) -> Witness:
    return Witness(trace, tuple(trace.conditions()))


def check_two_event(
    efg: ColoredDirectedGraph, spec: EventSpec, witness_limit: int = DEFAULT_WITNESS_LIMIT
) -> Verdict:
    """Path-sensitive check of ``spec`` on an event-flow graph.

    At most ``witness_limit`` witnesses are kept.  When the limit is hit the
    verdict is marked truncated and the list holds the first traces the
    search met (sorted), which is deterministic but not a sorted prefix of
    the full witness set.
    """
    _check_spec(efg, spec)
    start = (efg.entry, State.NONE)

    # Forward: reachable (node, state-after-node) pairs.
    reached = {start}
    work = [start]
    while work:
        n, s = work.pop()
        for m in efg.out_neighbors(n):
            pair = (m, step(s, spec.role(m)))
            if pair not in reached:
                reached.add(pair)
                work.append(pair)
    status, bad = _status(s for n, s in reached if n == efg.exit)
    verdict = Verdict(spec.object_id, status)
    if bad is None:
        return verdict

    # Backward: which product nodes can still end at (exit, bad).
    goal = (efg.exit, bad)
    preds: dict[tuple, list[tuple]] = {}
    for n, s in reached:
        for m in efg.out_neighbors(n):
            preds.setdefault((m, step(s, spec.role(m))), []).append((n, s))
    alive = {goal}
    work = [goal]
    while work:
        for p in preds.get(work.pop(), ()):
            if p not in alive:
                alive.add(p)
                work.append(p)

    # Enumerate product trails from start to goal.
    traces: dict[str, EventTrace] = {}
    used: set[tuple] = set()
    path = [start]

    def successors(pair):
        n, s = pair
        for m in sorted(efg.out_neighbors(n), key=node_sort_key):
            nxt = (m, step(s, spec.role(m)))
            if nxt in alive and (n, m, s) not in used:
                yield (n, m, s), nxt

    frames = [(successors(start), None)]
    while frames:
        it, arrived_by = frames[-1]
        found = next(it, None)
        if found is None:
            frames.pop()
            path.pop()
            used.discard(arrived_by)
            continue
        key, nxt = found
        used.add(key)
        path.append(nxt)
        frames.append((successors(nxt), key))
        if nxt == goal:
            nodes = [p[0] for p in path]
            labels = [efg.label(a, b) for a, b in zip(nodes, nodes[1:])] + [None]
            trace = make_trace(efg, nodes, labels)
            traces.setdefault(str(trace), trace)
            if len(traces) > witness_limit:
                verdict.truncated = True
                break
    verdict.witnesses = [_witness(traces[key]) for key in sorted(traces)][:witness_limit]
    return verdict


def check_on_cfg_oracle(
    cfg: ColoredDirectedGraph,
    spec: EventSpec,
    k: int = 1,
    relevant: Optional[Iterable[NodeId]] = None,
    max_paths: int = DEFAULT_MAX_PATHS,
    witness_limit: int = DEFAULT_WITNESS_LIMIT,
) -> Verdict:
    """The same check by brute-force enumeration of bounded CFG paths.

    Witnesses are the violating traces whose state-annotated transitions
    are all distinct, which is what :func:`check_two_event` reports.
    """
    _check_spec(cfg, spec)
    if relevant is None:
        from .efg import build_efg

        relevant = build_efg(cfg).efg.nodes
    table = segment_table(cfg, relevant, max_paths)
    exit_states: list[State] = []
    violating: dict[State, dict[str, EventTrace]] = {State.HELD: {}, State.ESCAPED: {}}
    for seq in _walk_states(cfg, table, spec, k, max_paths):
        states = _states_along(seq, spec)
        final = states[-1]
        exit_states.append(final)
        if final not in violating:
            continue
        annotated = [(a, b, s) for a, b, s in zip(seq, seq[1:], states)]
        if len(set(annotated)) != len(annotated):
            continue
        labels = [_merged_label(table, a, b) for a, b in zip(seq, seq[1:])] + [None]
        trace = make_trace(cfg, seq, labels)
        violating[final].setdefault(str(trace), trace)
    status, bad = _status(exit_states)
    verdict = Verdict(spec.object_id, status)
    if bad is not None:
        found = violating[bad]
        keys = sorted(found)
        verdict.truncated = len(keys) > witness_limit
        verdict.witnesses = [_witness(found[key]) for key in keys[:witness_limit]]
    return verdict


def _merged_label(table: SegmentTable, a: NodeId, b: NodeId) -> Optional[str]:
    return merge_labels(label for _, label in table.segments[a][b])


def _states_along(seq: tuple[NodeId, ...], spec: EventSpec) -> list[State]:
    states = []
    s = State.NONE
    for n in seq:
        s = step(s, spec.role(n))
        states.append(s)
    return states


def _walk_states(
    cfg: ColoredDirectedGraph, table: SegmentTable, spec: EventSpec, k: int, max_paths: int
) -> Iterator[tuple[NodeId, ...]]:
    """Relevant-node sequences where each (transition, state) is used at most k times."""
    if k < 1:
        raise ValueError("the budget k must be at least 1")
    used: dict[tuple, int] = {}
    seq = [cfg.entry]
    states = [step(State.NONE, spec.role(cfg.entry))]
    frames: list[tuple[Iterator[NodeId], Optional[tuple]]] = [(iter(table.targets(cfg.entry)), None)]
    emitted = 0
    while frames:
        it, arrived_by = frames[-1]
        nxt = next(it, None)
        if nxt is None:
            frames.pop()
            seq.pop()
            states.pop()
            if arrived_by is not None:
                used[arrived_by] -= 1
            continue
        key = (seq[-1], nxt, states[-1])
        if used.get(key, 0) >= k:
            continue
        used[key] = used.get(key, 0) + 1
        seq.append(nxt)
        states.append(step(states[-1], spec.role(nxt)))
        frames.append((iter(table.targets(nxt)), key))
        if nxt == cfg.exit:
            emitted += 1
            if emitted > max_paths:
                raise OracleTooLarge(f"more than {max_paths} bounded paths")
            yield tuple(seq)
