import json

import jsonschema
import pytest
from hypothesis import given

from eventflow.check import check_two_event
from eventflow.dot import parse_dot, quote, tokenize
from eventflow.efg import build_efg
from eventflow.errors import IngestError
from eventflow.graph import EventRole, NodeKind
from eventflow.ingest import emit, emit_dot, emit_many, graph_to_json, ingest, ingest_one, read_json
from eventflow.report import build_report, load_schema, oracle_section
from eventflow.stats import compute_stats
from eventflow.traces import efg_traces, verify_bijection
from strategies import FIXTURES, fixture_text, generated, load, load_graph, seeds

MINIMAL = "digraph m { TOP [kind=entry]; BOT [kind=exit]; TOP -> BOT; }"


def _error(text, source="doc.dot"):
    with pytest.raises(IngestError) as info:
        ingest(text, source)
    return info.value


def test_minimal_document():
    doc = ingest_one(MINIMAL)
    assert doc.graph.nodes == ["TOP", "BOT"]
    assert doc.graph.name == "m"
    assert doc.specs == []


def test_rng_store_document():
    doc = load("rng_store.dot")[0]
    assert len(doc.graph) == 24
    [spec] = doc.specs
    assert spec.object_id == "rng_mutex"
    assert spec.events == {"e1": EventRole.FIRST, "e2": EventRole.SECOND}


def test_case_study_has_three_functions():
    assert [d.graph.name for d in load("case_study.dot")] == ["f1", "f2", "f3"]


def test_kinds_inferred_from_fanout():
    g = ingest_one("digraph { a [kind=entry]; z [kind=exit]; a -> b; b -> c [label=T]; b -> z [label=F]; c -> z; }").graph
    assert g.kind("b") == NodeKind.BRANCH
    assert g.kind("c") == NodeKind.PLAIN
    assert g.entry == "a" and g.exit == "z"


def test_dot_syntax_accepted():
    text = """
    /* block */ strict digraph "my graph" {
      # a hash comment line
      rankdir=LR; graph [fontsize=9]
      node [shape=box]; edge [color=red];
      TOP [kind=entry] BOT [kind=exit]
      "TOP" -> x -> BOT // chained
      x [label="a \\"quoted\\" label", kind=plain];
    }
    """
    doc = ingest_one(text)
    assert doc.graph.name == "my graph"
    assert set(doc.graph.nodes) == {"TOP", "x", "BOT"}


def test_several_digraphs():
    assert len(parse_dot(MINIMAL + "\n" + MINIMAL.replace(" m ", " n "))) == 2


def test_tokens_carry_positions():
    tokens = tokenize('digraph {\n  a -> "b c";\n}')
    arrow = next(t for t in tokens if t.kind == "->")
    assert (arrow.line, arrow.column) == (2, 5)
    assert any(t.text == "b c" for t in tokens)


@pytest.mark.parametrize(
    "text, line, column, fragment",
    [
        ("graph g { a -- b; }", 1, 1, "undirected"),
        ("digraph g { a -- b; }", 1, 15, "'--'"),
        ("digraph g { subgraph s { a; } }", 1, 13, "subgraph"),
        ("digraph g { a:n -> b; }", 1, 14, "port"),
        ("digraph g {\n  a -> b;\n", 3, 1, "unterminated"),
        ("digraph g { a -> b @ }", 1, 20, "unexpected character"),
        ("digraph g { a [kind] }", 1, 20, "'='"),
        ("digraph g { a # b }", 1, 15, "'#'"),
        ("   ", 1, 1, "no digraph"),
        ("subgraph x {}", 1, 1, "digraph"),
    ],
)
def test_parse_errors_are_positioned(text, line, column, fragment):
    err = _error(text)
    assert err.code == "parse-error"
    assert (err.line, err.column) == (line, column)
    assert fragment in err.message
    assert err.render().startswith(f"doc.dot:{line}:{column}: error[parse-error]:")


def test_json_parse_error():
    err = _error('{"nodes": [', "doc.json")
    assert err.code == "parse-error" and err.line == 1


HEAD = "TOP [kind=entry]; BOT [kind=exit];"


@pytest.mark.parametrize(
    "body, code",
    [
        ("TOP [kind=entry]; T2 [kind=entry]; BOT [kind=exit]; TOP -> BOT; T2 -> BOT;", "duplicate-entry"),
        ("BOT [kind=exit]; a -> BOT;", "missing-entry"),
        ("TOP [kind=entry]; TOP -> a;", "missing-exit"),
        ("TOP [kind=entry]; B1 [kind=exit]; B2 [kind=exit]; TOP -> B1; TOP -> B2;", "duplicate-exit"),
        (HEAD + " TOP -> a; a -> BOT; a -> BOT;", "duplicate-edge"),
        (HEAD + " a [kind=loop]; TOP -> a -> BOT;", "unknown-attribute-value"),
        (HEAD + " a [kind=event, event_role=take]; TOP -> a -> BOT;", "unknown-attribute-value"),
        (HEAD + " a [kind=plain, object=m]; TOP -> a -> BOT;", "event-annotation"),
        (HEAD + " TOP -> a -> BOT; u -> a;", "unreachable"),
        (HEAD + " TOP -> a -> BOT; a -> d;", "dead-end"),
        (HEAD + " b [kind=branch]; TOP -> b -> BOT;", "branch-fanout"),
        (HEAD + " p [kind=plain]; TOP -> p; p -> BOT [label=T]; p -> q [label=F]; q -> BOT;", "plain-fanout"),
        (HEAD + " TOP -> BOT; BOT -> x; x -> BOT;", "exit-out-degree"),
        (HEAD + " TOP -> a -> BOT; a -> TOP;", "entry-in-degree"),
    ],
)
def test_diagnostic_codes(body, code):
    err = _error(f"digraph d {{ {body} }}")
    assert err.code == code
    assert "'d'" in err.message


def test_duplicate_edge_points_at_second_declaration():
    err = _error(f"digraph d {{\n {HEAD}\n TOP -> a; a -> BOT;\n a -> BOT;\n}}")
    assert (err.line, err.column) == (4, 2)


def test_json_document_shapes():
    g = load_graph("rng_store.dot")
    data = graph_to_json(g)
    for text in (json.dumps(data), json.dumps([data]), json.dumps({"graphs": [data]})):
        [doc] = read_json(text)
        assert doc.graph == g
    with pytest.raises(IngestError) as info:
        read_json('{"edges": []}')
    assert info.value.code == "json-shape"


def test_ingest_one_wants_one_graph():
    with pytest.raises(IngestError) as info:
        ingest_one(fixture_text("case_study.dot"))
    assert info.value.code == "graph-count"


def test_quoting():
    assert quote("abc") == "abc"
    assert quote("node") == '"node"'
    assert quote("a b") == '"a b"'
    assert quote('say "hi"') == '"say \\"hi\\""'


def _roundtrip(g):
    for fmt in ("dot", "json"):
        [doc] = ingest(emit(g, fmt))
        assert doc.graph == g
        assert doc.graph.signature() == g.signature()
        assert doc.graph.name == g.name
        assert emit(doc.graph, fmt) == emit(g, fmt)


@pytest.mark.parametrize("name", FIXTURES)
def test_fixture_roundtrip(name):
    for doc in load(name):
        _roundtrip(doc.graph)
        _roundtrip(build_efg(doc.graph).efg)


@given(seeds)
def test_generated_roundtrip(seed):
    _roundtrip(generated(seed, nodes=(1, 30)))


def test_multi_graph_emission():
    graphs = [d.graph for d in load("case_study.dot")]
    assert [d.graph for d in ingest(emit_many(graphs, "dot"))] == graphs
    assert [d.graph for d in ingest(emit_many(graphs, "json"))] == graphs


def test_rng_store_efg_emits_five_nodes_five_edges():
    text = emit_dot(build_efg(load_graph("rng_store.dot")).efg)
    lines = [line.strip() for line in text.splitlines()[1:-1]]
    assert len([line for line in lines if "->" not in line]) == 5
    assert len([line for line in lines if "->" in line]) == 5
    assert "c1 -> e2 [label=F];" in lines


def test_emission_is_stable():
    g = load_graph("branch_loop.dot")
    assert emit_dot(g) == emit_dot(load_graph("branch_loop.dot"))


def test_graph_json_matches_schema():
    schema = load_schema("graph")
    for name in FIXTURES:
        for doc in load(name):
            jsonschema.validate(graph_to_json(doc.graph), schema)
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate({"schema": "eventflow.graph/1", "name": "x", "nodes": [{"id": "a"}], "edges": []}, schema)


def test_report_json_matches_schema():
    schema = load_schema("report")
    g = load_graph("rng_store.dot")
    doc = load("rng_store.dot")[0]
    efg = build_efg(g).efg
    verdicts = [check_two_event(efg, spec) for spec in doc.specs]
    plain = build_report(g.name, compute_stats(g, efg), efg_traces(efg), verdicts)
    jsonschema.validate(plain, schema)
    section = oracle_section(verify_bijection(g, 1), 1, True)
    full = build_report(g.name, compute_stats(g, efg), efg_traces(efg), verdicts, section)
    jsonschema.validate(json.loads(json.dumps(full)), schema)
    assert full["classes"] == ["TOP e1 c1[F] e2 BOT", "TOP e1 c1[T] BOT"]
    broken = dict(full, classes=["e1 c1"])
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(broken, schema)
