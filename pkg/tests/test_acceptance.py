"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` or directly as a script.  The
summary lines appear at the end of the pytest output.
"""

import gc
import sys
import time

import pytest

import conftest
from eventflow.check import check_on_cfg_oracle, check_two_event, specs_from_graph
from eventflow.cli import main
from eventflow.efg import (
    build_efg,
    find_irrelevant_branch_nodes_bruteforce,
    subgraphs_with_few_successors,
)
from eventflow.generate import ladder_cfg
from eventflow.graph import restrict_to_object, successors_of_subgraph
from eventflow.ingest import emit, ingest
from eventflow.stats import ReductionStats
from eventflow.traces import verify_bijection
from strategies import FIXTURES, generated, load, load_graph
from test_generate_stats import REFERENCE_ROWS
import random

SEEDS = range(1000)


def record(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({detail})"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def small(seed):
    # At most 10 interior nodes plus TOP and BOT.
    return generated(seed, nodes=(1, 10), events=(0, 3), back_edges=2)


def test_criterion_01_rng_store_exact(capsys):
    start = time.perf_counter()
    efg = build_efg(load_graph("rng_store.dot")).efg
    code = main(["classes", str(_fixture_path("rng_store.dot"))])
    out = capsys.readouterr().out.splitlines()
    elapsed = time.perf_counter() - start
    edges = {(e.source, e.target) for e in efg.edges()}
    ok = (
        code == 0
        and set(efg.nodes) == {"TOP", "e1", "c1", "e2", "BOT"}
        and edges == {("TOP", "e1"), ("e1", "c1"), ("c1", "e2"), ("c1", "BOT"), ("e2", "BOT")}
        and out == ["TOP e1 c1[F] e2 BOT", "TOP e1 c1[T] BOT"]
        and elapsed < 1.0
    )
    record(1, "worked example builds to 5 nodes/5 edges with the two traces", ok, f"{elapsed:.3f}s")


def _fixture_path(name):
    from importlib.resources import files

    return files("eventflow") / "fixtures" / name


def test_criterion_02_loop_retention():
    start = time.perf_counter()
    result = build_efg(load_graph("branch_loop.dot"))
    elapsed = time.perf_counter() - start
    kept = frozenset({"c1", "c2"})
    ok = (
        kept in result.retained_sccs
        and kept <= set(result.efg.nodes)
        and successors_of_subgraph(result.efg, kept) == {"BOT", "e1"}
        and elapsed < 1.0
    )
    record(2, "loop {c1, c2} kept with successors {BOT, e1}", ok, f"{elapsed:.3f}s")


def test_criterion_03_bijection():
    start = time.perf_counter()
    failures = []
    for seed in SEEDS:
        g = small(seed)
        for k in (1, 2):
            if not verify_bijection(g, k).ok:
                failures.append((seed, k))
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 120
    record(3, "EFG traces equal CFG classes, 1000 graphs, k in {1,2}",
           ok, f"{len(failures)} failures, {elapsed:.1f}s")


def test_criterion_04_no_irrelevant_branches():
    start = time.perf_counter()
    failures = [s for s in range(500) if find_irrelevant_branch_nodes_bruteforce(build_efg(small(s)).efg)]
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 300
    record(4, "no irrelevant branch node in 500 EFGs", ok, f"{len(failures)} failures, {elapsed:.1f}s")


def test_criterion_05_two_successors():
    start = time.perf_counter()
    failures = [s for s in range(500) if subgraphs_with_few_successors(build_efg(small(s)).condensed_efg)]
    elapsed = time.perf_counter() - start
    record(5, "every event-free subgraph of 500 condensed EFGs has >= 2 successors",
           not failures, f"{len(failures)} failures, {elapsed:.1f}s")


def test_criterion_06_verdicts():
    start = time.perf_counter()
    mismatches = []
    checked = 0
    for seed in SEEDS:
        g = generated(seed, nodes=(1, 10), events=(1, 3), back_edges=2)
        for spec in specs_from_graph(g):
            restricted = restrict_to_object(g, spec.object_id)
            efg = build_efg(restricted).efg
            on_efg = check_two_event(efg, spec)
            for k in (1, 2):
                on_cfg = check_on_cfg_oracle(restricted, spec, k, efg.nodes)
                checked += 1
                if on_efg.status != on_cfg.status or on_efg.traces() != on_cfg.traces():
                    mismatches.append((seed, spec.object_id, k))
    elapsed = time.perf_counter() - start
    record(6, "EFG verdicts and witnesses equal the CFG oracle, 1000 graphs, k in {1,2}",
           not mismatches and checked >= 1000, f"{len(mismatches)} mismatches in {checked} checks, {elapsed:.1f}s")


def test_criterion_07_confluence():
    start = time.perf_counter()
    mismatches = 0
    for seed in range(200):
        g = generated(seed, nodes=(1, 30), events=(0, 4), back_edges=3)
        reference = build_efg(g).efg
        for order in range(20):
            if build_efg(g, random.Random(seed * 1000 + order)).efg != reference:
                mismatches += 1
    elapsed = time.perf_counter() - start
    record(7, "20 random reduction orders on 200 graphs give one EFG", mismatches == 0,
           f"{mismatches} mismatches, {elapsed:.1f}s")


def _best_time(g, repeats):
    best = float("inf")
    for _ in range(repeats):
        gc.collect()
        gc.disable()
        try:
            start = time.perf_counter()
            build_efg(g)
            best = min(best, time.perf_counter() - start)
        finally:
            gc.enable()
    return best


def test_criterion_08_linearity():
    times = {}
    for size, repeats in ((10**4, 5), (10**5, 3), (10**6, 2)):
        g = ladder_cfg(size // 4, events_every=7)
        times[size] = _best_time(g, repeats)
        del g
        gc.collect()
    first = times[10**5] / times[10**4]
    second = times[10**6] / times[10**5]
    detail = (
        f"{times[10**4]:.3f}s, {times[10**5]:.3f}s, {times[10**6]:.2f}s; "
        f"ratios {first:.1f} and {second:.1f}, bound 13"
    )
    record(8, "build time grows at most 13x per decade up to 10^6 nodes", first <= 13 and second <= 13, detail)


def test_criterion_09_percentages():
    worst = 0.0
    for _, nb, na, np_, eb, ea, ep, bb, ba, bp in REFERENCE_ROWS:
        stats = ReductionStats("row", nb, na, eb, ea, bb, ba)
        for got, want in ((stats.nodes_pct, np_), (stats.edges_pct, ep), (stats.branch_pct, bp)):
            worst = max(worst, abs(got - want))
    cells = 3 * len(REFERENCE_ROWS)
    record(9, f"all {cells} reference reduction percentages reproduced", cells == 30 and worst <= 0.1 + 1e-9,
           f"max deviation {worst:.2f}")


def test_criterion_10_roundtrip():
    graphs = [d.graph for name in FIXTURES for d in load(name)]
    graphs += [generated(seed, nodes=(1, 30), events=(0, 4)) for seed in range(200)]
    failures = 0
    for g in graphs:
        for fmt in ("dot", "json"):
            [doc] = ingest(emit(g, fmt))
            if doc.graph != g or doc.graph.name != g.name:
                failures += 1
    record(10, f"ingest(emit(g)) == g for {len(graphs)} graphs in DOT and JSON", failures == 0,
           f"{failures} failures")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
