"""Graph documents: DOT or JSON text in, validated graphs and event specs out.

Attributes understood on nodes::

    kind        entry | exit | event | branch | plain   (inferred from fan-out if absent)
    event_role  first | second | flow                   (event nodes only)
    object      any string                              (event nodes only)

and ``label`` on edges.  Anything else (colors, shapes, tooltips...) is
ignored so that annotated dumps from other tools load unchanged.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Iterable, Optional

from .check import EventSpec, specs_from_graph
from .dot import EdgeStmt, NodeStmt, format_attrs, parse_dot, quote
from .errors import IngestError, MalformedGraph
from .graph import ColoredDirectedGraph, EventRole, NodeId, NodeKind, validate

GRAPH_SCHEMA_ID = "eventflow.graph/1"

_KINDS = {k.value: k for k in NodeKind if k is not NodeKind.CONTRACTED}
_ROLES = {r.value: r for r in EventRole}


@dataclass
class Document:
    graph: ColoredDirectedGraph
    specs: list[EventSpec]


@dataclass
class _NodeDecl:
    attrs: dict[str, str]
    line: Optional[int] = None
    column: Optional[int] = None


class _Builder:
    """Collects declarations in source order and checks them as a whole."""

    def __init__(self, name: str, source: str) -> None:
        self.name = name
        self.source = source
        self.nodes: dict[NodeId, _NodeDecl] = {}
        self.edges: dict[tuple[NodeId, NodeId], tuple[Optional[str], Optional[int], Optional[int]]] = {}

    def fail(self, code: str, message: str, line: Optional[int] = None, column: Optional[int] = None):
        return IngestError(code, f"graph {self.name!r}: {message}", line=line, column=column, source=self.source)

    def node(self, node: NodeId, attrs: dict[str, str], line=None, column=None) -> None:
        decl = self.nodes.get(node)
        if decl is None:
            self.nodes[node] = _NodeDecl(dict(attrs), line, column)
        else:
            decl.attrs.update(attrs)
            if decl.line is None:
                decl.line, decl.column = line, column

    def edge(self, source: NodeId, target: NodeId, label: Optional[str], line=None, column=None) -> None:
        for n in (source, target):
            if n not in self.nodes:
                self.nodes[n] = _NodeDecl({}, None, None)
        if (source, target) in self.edges:
            raise self.fail("duplicate-edge", f"edge {source} -> {target} is declared twice", line, column)
        self.edges[(source, target)] = (label, line, column)

    def build(self) -> ColoredDirectedGraph:
        out_degree: dict[NodeId, int] = dict.fromkeys(self.nodes, 0)
        for u, _ in self.edges:
            out_degree[u] += 1

        kinds: dict[NodeId, NodeKind] = {}
        annotations: dict[NodeId, tuple[Optional[str], Optional[EventRole]]] = {}
        for n, decl in self.nodes.items():
            attrs = decl.attrs
            raw = attrs.get("kind")
            if raw is None:
                kind = NodeKind.BRANCH if out_degree[n] >= 2 else NodeKind.PLAIN
            elif raw in _KINDS:
                kind = _KINDS[raw]
            else:
                raise self.fail(
                    "unknown-attribute-value",
                    f"node {n!r}: kind={raw!r} is not one of {', '.join(_KINDS)}",
                    decl.line,
                    decl.column,
                )
            role_text = attrs.get("event_role")
            obj = attrs.get("object")
            if kind is not NodeKind.EVENT and (role_text is not None or obj is not None):
                raise self.fail(
                    "event-annotation",
                    f"node {n!r} has event_role/object but kind={kind.value}",
                    decl.line,
                    decl.column,
                )
            if role_text is not None and role_text not in _ROLES:
                raise self.fail(
                    "unknown-attribute-value",
                    f"node {n!r}: event_role={role_text!r} is not one of {', '.join(_ROLES)}",
                    decl.line,
                    decl.column,
                )
            kinds[n] = kind
            if kind is NodeKind.EVENT:
                annotations[n] = (obj, _ROLES[role_text] if role_text is not None else None)

        for which, code_missing, code_dup in (
            (NodeKind.ENTRY, "missing-entry", "duplicate-entry"),
            (NodeKind.EXIT, "missing-exit", "duplicate-exit"),
        ):
            found = [n for n, k in kinds.items() if k is which]
            if not found:
                raise self.fail(code_missing, f"no node has kind={which.value}")
            if len(found) > 1:
                decl = self.nodes[found[1]]
                raise self.fail(
                    code_dup,
                    f"more than one node has kind={which.value}: {', '.join(found)}",
                    decl.line,
                    decl.column,
                )
        entry = next(n for n, k in kinds.items() if k is NodeKind.ENTRY)
        exit_ = next(n for n, k in kinds.items() if k is NodeKind.EXIT)

        g = ColoredDirectedGraph(entry, exit_, name=self.name)
        for n, kind in kinds.items():
            if kind in (NodeKind.ENTRY, NodeKind.EXIT):
                continue
            if kind is NodeKind.EVENT:
                obj, role = annotations[n]
                g.add_node(n, kind, obj=obj, role=role)
            else:
                g.add_node(n, kind)
        for (u, v), (label, _, _) in self.edges.items():
            g.add_edge(u, v, label)
        try:
            validate(g)
        except MalformedGraph as exc:
            raise self.fail(exc.code, exc.message) from None
        return g


def _document(builder: _Builder) -> Document:
    g = builder.build()
    return Document(g, specs_from_graph(g))


def read_dot(text: str, source: str = "<input>") -> list[Document]:
    documents = []
    for i, dg in enumerate(parse_dot(text, source)):
        builder = _Builder(dg.name or f"graph{i}", source)
        for stmt in dg.statements:
            if isinstance(stmt, NodeStmt):
                builder.node(stmt.node, stmt.attrs, stmt.line, stmt.column)
            elif isinstance(stmt, EdgeStmt):
                builder.edge(stmt.source, stmt.target, stmt.attrs.get("label"), stmt.line, stmt.column)
        documents.append(_document(builder))
    return documents


def _graph_from_json(data: Any, source: str, index: int) -> Document:
    if not isinstance(data, dict) or not isinstance(data.get("nodes"), list):
        raise IngestError("json-shape", "a graph object needs a 'nodes' list", source=source)
    builder = _Builder(str(data.get("name", f"graph{index}")), source)
    for item in data["nodes"]:
        if not isinstance(item, dict) or "id" not in item:
            raise IngestError("json-shape", "every node needs an 'id'", source=source)
        attrs = {k: str(v) for k, v in item.items() if k != "id" and v is not None}
        builder.node(str(item["id"]), attrs)
    for item in data.get("edges", []):
        if not isinstance(item, dict) or "source" not in item or "target" not in item:
            raise IngestError("json-shape", "every edge needs 'source' and 'target'", source=source)
        label = item.get("label")
        builder.edge(str(item["source"]), str(item["target"]), None if label is None else str(label))
    return _document(builder)


def read_json(text: str, source: str = "<input>") -> list[Document]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise IngestError("parse-error", exc.msg, line=exc.lineno, column=exc.colno, source=source) from None
    if isinstance(data, dict) and "graphs" in data:
        items = data["graphs"]
    elif isinstance(data, list):
        items = data
    else:
        items = [data]
    return [_graph_from_json(item, source, i) for i, item in enumerate(items)]


def ingest(text: str, source: str = "<input>") -> list[Document]:
    """Read DOT or JSON (detected by the first non-blank character)."""
    stripped = text.lstrip()
    if stripped.startswith(("{", "[")):
        return read_json(text, source)
    return read_dot(text, source)


def ingest_one(text: str, source: str = "<input>") -> Document:
    documents = ingest(text, source)
    if len(documents) != 1:
        raise IngestError("graph-count", f"expected one graph, found {len(documents)}", source=source)
    return documents[0]


# -- emission --------------------------------------------------------------


def _node_attrs(g: ColoredDirectedGraph, n: NodeId) -> list[tuple[str, str]]:
    attrs = [("kind", g.kind(n).value)]
    annotation = g.event(n)
    if annotation is not None:
        obj, role = annotation
        if role is not None:
            attrs.append(("event_role", role.value))
        if obj is not None:
            attrs.append(("object", obj))
    return attrs


def _ordered_edges(g: ColoredDirectedGraph) -> list:
    position = {n: i for i, n in enumerate(g.sorted_nodes())}
    return sorted(g.edges(), key=lambda e: (position[e.source], position[e.target]))


def emit_dot(g: ColoredDirectedGraph) -> str:
    lines = [f"digraph {quote(g.name)} {{"]
    for n in g.sorted_nodes():
        lines.append(f"  {quote(n)}{format_attrs(_node_attrs(g, n))};")
    for e in _ordered_edges(g):
        label = e.label
        attrs = [] if label is None else [("label", label)]
        lines.append(f"  {quote(e.source)} -> {quote(e.target)}{format_attrs(attrs)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def graph_to_json(g: ColoredDirectedGraph) -> dict:
    nodes = []
    for n in g.sorted_nodes():
        item: dict[str, Any] = {"id": n}
        item.update(_node_attrs(g, n))
        nodes.append(item)
    edges = []
    for e in _ordered_edges(g):
        item = {"source": e.source, "target": e.target}
        if e.label is not None:
            item["label"] = e.label
        edges.append(item)
    return {"schema": GRAPH_SCHEMA_ID, "name": g.name, "nodes": nodes, "edges": edges}


def emit(g: ColoredDirectedGraph, fmt: str = "dot") -> str:
    if fmt == "dot":
        return emit_dot(g)
    if fmt == "json":
        return json.dumps(graph_to_json(g), indent=2) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def emit_many(graphs: Iterable[ColoredDirectedGraph], fmt: str = "dot") -> str:
    graphs = list(graphs)
    if fmt == "json" and len(graphs) != 1:
        return json.dumps({"graphs": [graph_to_json(g) for g in graphs]}, indent=2) + "\n"
    return "".join(emit(g, fmt) for g in graphs)
