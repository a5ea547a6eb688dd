"""Reduction statistics: per-graph counts and corpus histograms."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Sequence

from .graph import ColoredDirectedGraph, NodeKind

SIZE_BUCKETS = ("<=5", "6-10", "11-30", "31-50", ">50")
BRANCH_BUCKETS = ("0", "1-5", "6-10", "11-30", ">30")


def percentage(before: int, after: int) -> float:
    """Reduction in percent, one decimal, halves rounded away from zero."""
    if before <= 0:
        return 0.0
    value = Decimal(100 * (before - after)) / Decimal(before)
    return float(value.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def share(part: int, whole: int) -> float:
    if whole <= 0:
        return 0.0
    value = Decimal(100 * part) / Decimal(whole)
    return float(value.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class ReductionStats:
    graph_id: str
    nodes_before: int
    nodes_after: int
    edges_before: int
    edges_after: int
    branch_before: int
    branch_after: int

    @property
    def nodes_pct(self) -> float:
        return percentage(self.nodes_before, self.nodes_after)

    @property
    def edges_pct(self) -> float:
        return percentage(self.edges_before, self.edges_after)

    @property
    def branch_pct(self) -> float:
        return percentage(self.branch_before, self.branch_after)

    def to_dict(self) -> dict:
        data = asdict(self)
        data.update(nodes_pct=self.nodes_pct, edges_pct=self.edges_pct, branch_pct=self.branch_pct)
        return data


def compute_stats(
    before: ColoredDirectedGraph, after: ColoredDirectedGraph, graph_id: str | None = None
) -> ReductionStats:
    """Counts for a CFG and its event-flow graph.

    Branch nodes of the input are counted by fan-out; in the output, by
    kind, since an event node may also fan out and is not a branch node.
    """
    return ReductionStats(
        graph_id=graph_id or before.name,
        nodes_before=len(before),
        nodes_after=len(after),
        edges_before=before.number_of_edges(),
        edges_after=after.number_of_edges(),
        branch_before=sum(1 for n in before.nodes if before.out_degree(n) >= 2),
        branch_after=sum(1 for n in after.nodes if after.kind(n) == NodeKind.BRANCH),
    )


def size_bucket(count: int) -> str:
    if count <= 5:
        return SIZE_BUCKETS[0]
    if count <= 10:
        return SIZE_BUCKETS[1]
    if count <= 30:
        return SIZE_BUCKETS[2]
    if count <= 50:
        return SIZE_BUCKETS[3]
    return SIZE_BUCKETS[4]


def branch_bucket(count: int) -> str:
    if count == 0:
        return BRANCH_BUCKETS[0]
    if count <= 5:
        return BRANCH_BUCKETS[1]
    if count <= 10:
        return BRANCH_BUCKETS[2]
    if count <= 30:
        return BRANCH_BUCKETS[3]
    return BRANCH_BUCKETS[4]


def corpus_histograms(rows: Iterable[ReductionStats]) -> dict[str, dict[str, int]]:
    """Distribution of EFG sizes over a corpus, in the bucket layout used for reports."""
    hist = {
        "nodes": dict.fromkeys(SIZE_BUCKETS, 0),
        "edges": dict.fromkeys(SIZE_BUCKETS, 0),
        "branch": dict.fromkeys(BRANCH_BUCKETS, 0),
    }
    for row in rows:
        hist["nodes"][size_bucket(row.nodes_after)] += 1
        hist["edges"][size_bucket(row.edges_after)] += 1
        hist["branch"][branch_bucket(row.branch_after)] += 1
    return hist


def _render(header: Sequence[str], body: list[Sequence[str]]) -> str:
    widths = [max(len(str(r[i])) for r in [header, *body]) for i in range(len(header))]
    lines = []
    for r in [header, *body]:
        cells = [str(c).ljust(w) if i == 0 else str(c).rjust(w) for i, (c, w) in enumerate(zip(r, widths))]
        lines.append("  ".join(cells).rstrip())
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def render_table(rows: Sequence[ReductionStats]) -> str:
    """Per-graph before/after/percentage table."""
    header = ["graph", "nodes", "EFG", "P(%)", "edges", "EFG", "P(%)", "branch", "EFG", "P(%)"]
    body = [
        [
            r.graph_id,
            r.nodes_before,
            r.nodes_after,
            f"{r.nodes_pct:.1f}",
            r.edges_before,
            r.edges_after,
            f"{r.edges_pct:.1f}",
            r.branch_before,
            r.branch_after,
            f"{r.branch_pct:.1f}",
        ]
        for r in rows
    ]
    return _render(header, body)


def render_histograms(hist: dict[str, dict[str, int]]) -> str:
    total = sum(hist["nodes"].values())
    blocks = []
    for key, title in (("nodes", "EFG nodes"), ("edges", "EFG edges"), ("branch", "EFG branch nodes")):
        body = []
        for bucket, count in hist[key].items():
            body.append([bucket, count, f"{share(count, total):.1f}"])
        blocks.append(_render([title, "graphs", "%"], body))
    return "\n\n".join(blocks)
