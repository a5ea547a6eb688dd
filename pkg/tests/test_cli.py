import io
import json
import sys
from importlib.resources import files

import jsonschema
import pytest

from eventflow import __version__
from eventflow.cli import main
from eventflow.generate import ladder_cfg
from eventflow.ingest import emit_dot, ingest
from eventflow.report import load_schema


def fixture(name):
    return str(files("eventflow") / "fixtures" / name)


STORE = fixture("rng_store.dot")
CASE = fixture("case_study.dot")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_build(capsys):
    code, out, _ = run(capsys, "build", STORE)
    assert code == 0
    [doc] = ingest(out)
    assert sorted(doc.graph.nodes) == ["BOT", "TOP", "c1", "e1", "e2"]
    assert doc.graph.number_of_edges() == 5


def test_build_json_to_file(capsys, tmp_path):
    target = tmp_path / "efg.json"
    code, out, _ = run(capsys, "build", STORE, "--format", "json", "-o", str(target))
    assert code == 0 and out == ""
    data = json.loads(target.read_text())
    jsonschema.validate(data, load_schema("graph"))
    assert len(data["nodes"]) == 5


def test_build_reads_stdin(capsys, monkeypatch):
    with open(STORE) as fh:
        monkeypatch.setattr(sys, "stdin", io.StringIO(fh.read()))
    code, out, _ = run(capsys, "build")
    assert code == 0 and "c1 -> e2 [label=F];" in out


def test_output_is_deterministic(capsys):
    first = run(capsys, "build", CASE)[1]
    assert run(capsys, "build", CASE)[1] == first


def test_classes(capsys):
    code, out, _ = run(capsys, "classes", STORE)
    assert code == 0
    assert out.splitlines() == ["TOP e1 c1[F] e2 BOT", "TOP e1 c1[T] BOT"]


def test_classes_of_several_graphs(capsys):
    out = run(capsys, "classes", CASE, "-k", "2")[1].splitlines()
    assert out[0] == "# f1" and "# f2" in out and "# f3" in out
    assert "TOP c2[F] e1[T] BOT" in out


def test_stats_table_and_json(capsys):
    code, out, _ = run(capsys, "stats", STORE, CASE)
    assert code == 0
    assert out.splitlines()[0].split()[:4] == ["graph", "nodes", "EFG", "P(%)"]
    assert "EFG branch nodes" in out
    code, out, _ = run(capsys, "stats", "--json", STORE)
    data = json.loads(out)
    assert data["graphs"][0]["branch_pct"] == 80.0
    assert data["histograms"]["nodes"]["<=5"] == 1


def test_check_violation(capsys):
    code, out, _ = run(capsys, "check", STORE)
    assert code == 3
    assert "rng_store rng_mutex: violation" in out
    assert "TOP e1 c1[T] BOT    conditions: c1=T" in out


def test_check_case_study(capsys):
    code, out, _ = run(capsys, "check", CASE)
    assert code == 3
    assert "f1: no first event" in out
    assert "f2 cpufreq_rwsem: violation" in out
    assert "conditions: c2=F, e1=T" in out


def test_check_json_report(capsys):
    code, out, _ = run(capsys, "check", "--json", STORE)
    assert code == 3
    report = json.loads(out)
    jsonschema.validate(report, load_schema("report"))
    assert report["verdicts"][0]["status"] == "violation"
    assert report["oracle"] is None


def test_check_safe_and_escapes(capsys, tmp_path):
    head = 'TOP [kind=entry]; BOT [kind=exit]; l [kind=event, event_role=first, object=m];'
    safe = write(tmp_path, "safe.dot", f"digraph s {{ {head} u [kind=event, event_role=second, object=m]; TOP -> l -> u -> BOT; }}")
    leak = write(tmp_path, "leak.dot", f"digraph e {{ {head} f [kind=event, event_role=flow, object=m]; TOP -> l -> f -> BOT; }}")
    assert run(capsys, "check", safe)[0] == 0
    code, out, _ = run(capsys, "check", leak)
    assert code == 4 and "escapes" in out


def test_check_unknown_object(capsys):
    code, out, _ = run(capsys, "check", STORE, "--object", "nope")
    assert code == 0
    assert "no first event for object 'nope'" in out


def test_oracle(capsys):
    code, out, _ = run(capsys, "oracle", "-k", "2", STORE, CASE)
    assert code == 0
    assert out.startswith("rng_store: ok (2 classes, 2 EFG traces, k=2, verdicts agree)")
    code, out, _ = run(capsys, "oracle", "--json", STORE)
    report = json.loads(out)
    jsonschema.validate(report, load_schema("report"))
    assert report["oracle"]["ok"] is True


def test_oracle_too_large(capsys, tmp_path):
    path = write(tmp_path, "ladder.dot", emit_dot(ladder_cfg(12)))
    code, _, err = run(capsys, "--max-paths", "50", "oracle", path)
    assert code == 5
    assert "more than 50" in err
    assert run(capsys, "oracle", path, "--max-paths", "50")[0] == 5


def test_gen(capsys):
    code, out, _ = run(capsys, "gen", "--seed", "3", "--nodes", "5..8", "--events", "1..2")
    assert code == 0
    [doc] = ingest(out)
    assert 7 <= len(doc.graph) <= 10
    assert run(capsys, "gen", "--seed", "3", "--nodes", "5..8", "--events", "1..2")[1] == out
    assert json.loads(run(capsys, "gen", "--seed", "3", "--format", "json")[1])["name"] == "gen3"


def test_gen_bad_config(capsys):
    code, _, err = run(capsys, "gen", "--seed", "1", "--nodes", "5..3")
    assert code == 1 and "error" in err
    with pytest.raises(SystemExit) as info:
        main(["gen", "--seed", "1", "--nodes", "x"])
    assert info.value.code == 1
    assert "N or A..B" in capsys.readouterr().err


def test_ingest_errors(capsys, tmp_path):
    bad = write(tmp_path, "bad.dot", "digraph g { TOP [kind=entry]; T2 [kind=entry]; }")
    code, out, err = run(capsys, "build", bad)
    assert code == 2 and out == ""
    assert "error[duplicate-entry]" in err and "bad.dot" in err
    code, _, err = run(capsys, "classes", str(tmp_path / "missing.dot"))
    assert code == 2 and "error[io-error]" in err


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main(["classes", STORE, "-k", "0"])
    assert info.value.code == 1


def test_quiet(capsys):
    code, out, err = run(capsys, "--quiet", "check", STORE)
    assert code == 3 and out == "" and err == ""


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert __version__ in capsys.readouterr().out
