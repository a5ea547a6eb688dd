"""Command-line interface: ``eventflow <command> [options] FILE...``.

Exit codes: 0 success/safe, 1 usage error or oracle mismatch, 2 ingest,
3 violation, 4 escapes, 5 oracle too large.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from . import __version__
from .check import Status, Verdict, check_on_cfg_oracle, check_two_event
from .efg import build_efg
from .errors import ConfigError, IngestError, OracleTooLarge, SpecMismatch
from .generate import GenConfig, generate_cfg
from .graph import restrict_to_object
from .ingest import Document, emit_many, ingest
from .report import build_report, oracle_section
from .stats import compute_stats, corpus_histograms, render_histograms, render_table
from .traces import DEFAULT_MAX_PATHS, efg_traces, verify_bijection

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INGEST = 2
EXIT_VIOLATION = 3
EXIT_ESCAPES = 4
EXIT_TOO_LARGE = 5


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with status 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    try:
        low = int(lo)
        high = int(hi) if sep else low
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or A..B, got {text!r}") from None
    return low, high


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # SUPPRESS so that a subcommand's defaults do not clobber options given before it.
    common.add_argument("--max-paths", type=_positive, default=argparse.SUPPRESS,
                        help=f"ceiling for path enumeration (default {DEFAULT_MAX_PATHS})")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS,
                        help="print nothing but artifacts; report through the exit code")

    parser = _Parser(prog="eventflow", description="Event-flow graphs for path-sensitive checks.",
                     parents=[common])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    def files(p: argparse.ArgumentParser) -> None:
        p.add_argument("files", nargs="*", metavar="FILE",
                       help="DOT or JSON graph documents (stdin if omitted)")

    p = sub.add_parser("build", parents=[common], help="compute event-flow graphs")
    files(p)
    p.add_argument("--object", help="keep only this object's events colored")
    p.add_argument("-o", "--output", help="write here instead of stdout")
    p.add_argument("--format", choices=("dot", "json"), default="dot")

    p = sub.add_parser("stats", parents=[common], help="reduction statistics")
    files(p)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--json", action="store_true")
    mode.add_argument("--table", action="store_true", help="text tables (default)")

    p = sub.add_parser("classes", parents=[common], help="event traces of the EFG paths")
    files(p)
    p.add_argument("-k", type=_positive, default=1, help="loop budget (default 1)")
    p.add_argument("--object", help="keep only this object's events colored")

    p = sub.add_parser("check", parents=[common], help="two-event property check")
    files(p)
    p.add_argument("--object", help="check only this object")
    p.add_argument("--json", action="store_true", help="print report documents")
    p.add_argument("-k", type=_positive, default=1, help="loop budget for reported classes")

    p = sub.add_parser("oracle", parents=[common], help="compare the EFG against CFG path enumeration")
    files(p)
    p.add_argument("-k", type=_positive, default=1, help="loop budget (default 1)")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("gen", parents=[common], help="generate a random CFG")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--nodes", type=_range, default=(4, 10), help="interior node count, N or A..B")
    p.add_argument("--events", type=_range, default=(0, 3), help="event count, N or A..B")
    p.add_argument("--branch-prob", type=float, default=0.4)
    p.add_argument("--loop-prob", type=float, default=0.3)
    p.add_argument("--back-edges", type=int, default=2)
    p.add_argument("--object", default="p", help="object id of generated events")
    p.add_argument("--format", choices=("dot", "json"), default="dot")
    p.add_argument("-o", "--output")
    return parser


def _read(paths: Sequence[str]) -> list[Document]:
    if not paths:
        return ingest(sys.stdin.read(), "<stdin>")
    documents = []
    for path in paths:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise IngestError("io-error", exc.strerror or str(exc), source=path) from None
        documents.extend(ingest(text, path))
    return documents


def _write(text: str, output: Optional[str]) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _verdicts(doc: Document, object_id: Optional[str]) -> list[Verdict]:
    out = []
    for spec in doc.specs:
        if object_id is not None and spec.object_id != object_id:
            continue
        result = build_efg(restrict_to_object(doc.graph, spec.object_id))
        out.append(check_two_event(result.efg, spec))
    return out


def _exit_for(verdicts: Sequence[Verdict]) -> int:
    statuses = {v.status for v in verdicts}
    if Status.VIOLATION in statuses:
        return EXIT_VIOLATION
    if Status.ESCAPES in statuses:
        return EXIT_ESCAPES
    return EXIT_OK


def _cmd_build(args, out) -> int:
    docs = _read(args.files)
    efgs = [build_efg(restrict_to_object(d.graph, args.object)).efg for d in docs]
    _write(emit_many(efgs, args.format), args.output)
    return EXIT_OK


def _cmd_stats(args, out) -> int:
    docs = _read(args.files)
    rows = [compute_stats(d.graph, build_efg(d.graph).efg) for d in docs]
    hist = corpus_histograms(rows)
    if args.json:
        out(json.dumps({"graphs": [r.to_dict() for r in rows], "histograms": hist}, indent=2))
    else:
        out(render_table(rows))
        out("")
        out(render_histograms(hist))
    return EXIT_OK


def _cmd_classes(args, out) -> int:
    docs = _read(args.files)
    for d in docs:
        efg = build_efg(restrict_to_object(d.graph, args.object)).efg
        if len(docs) > 1:
            out(f"# {d.graph.name}")
        for trace in efg_traces(efg, args.k, args.max_paths):
            out(str(trace))
    return EXIT_OK


def _cmd_check(args, out) -> int:
    docs = _read(args.files)
    everything: list[Verdict] = []
    reports = []
    for d in docs:
        verdicts = _verdicts(d, args.object)
        everything.extend(verdicts)
        if args.json:
            full = build_efg(restrict_to_object(d.graph, args.object))
            reports.append(
                build_report(
                    d.graph.name,
                    compute_stats(d.graph, full.efg),
                    efg_traces(full.efg, args.k, args.max_paths),
                    verdicts,
                )
            )
            continue
        if not verdicts:
            what = f"object {args.object!r}" if args.object else "any object"
            out(f"{d.graph.name}: no first event for {what}; nothing to check")
        for v in verdicts:
            suffix = " (witness list truncated)" if v.truncated else ""
            out(f"{d.graph.name} {v.object_id}: {v.status.value}{suffix}")
            for w in v.witnesses:
                conds = ", ".join(f"{n}={label}" for n, label in w.conditions) or "none"
                out(f"  {w.trace}    conditions: {conds}")
    if args.json:
        out(json.dumps(reports[0] if len(reports) == 1 else reports, indent=2))
    return _exit_for(everything)


def _cmd_oracle(args, out) -> int:
    docs = _read(args.files)
    ok = True
    reports = []
    for d in docs:
        result = build_efg(d.graph)
        bijection = verify_bijection(d.graph, args.k, args.max_paths, efg=result.efg)
        agree = True
        verdicts = []
        for spec in d.specs:
            restricted = restrict_to_object(d.graph, spec.object_id)
            r = build_efg(restricted)
            on_efg = check_two_event(r.efg, spec)
            on_cfg = check_on_cfg_oracle(restricted, spec, args.k, r.efg.nodes, args.max_paths)
            same = on_efg.status == on_cfg.status and on_efg.traces() == on_cfg.traces()
            agree = agree and same
            verdicts.append(on_efg)
        section = oracle_section(bijection, args.k, agree)
        ok = ok and section["ok"]
        if args.json:
            reports.append(
                build_report(
                    d.graph.name,
                    compute_stats(d.graph, result.efg),
                    bijection.efg_traces,
                    verdicts,
                    section,
                )
            )
            continue
        status = "ok" if section["ok"] else "MISMATCH"
        out(f"{d.graph.name}: {status} ({len(bijection.cfg_classes)} classes, "
            f"{len(bijection.efg_traces)} EFG traces, k={args.k}, verdicts "
            f"{'agree' if agree else 'differ'})")
        for line in bijection.diff:
            out(f"  {line}")
    if args.json:
        out(json.dumps(reports[0] if len(reports) == 1 else reports, indent=2))
    return EXIT_OK if ok else EXIT_USAGE


def _cmd_gen(args, out) -> int:
    config = GenConfig(
        nodes=args.nodes,
        events=args.events,
        branch_probability=args.branch_prob,
        loop_probability=args.loop_prob,
        max_back_edges=args.back_edges,
        seed=args.seed,
        object_id=args.object,
    )
    g = generate_cfg(config)
    _write(emit_many([g], args.format), args.output)
    return EXIT_OK


_COMMANDS = {
    "build": _cmd_build,
    "stats": _cmd_stats,
    "classes": _cmd_classes,
    "check": _cmd_check,
    "oracle": _cmd_oracle,
    "gen": _cmd_gen,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    args.quiet = getattr(args, "quiet", False)
    args.max_paths = getattr(args, "max_paths", DEFAULT_MAX_PATHS)

    def out(line: str) -> None:
        if not args.quiet:
            print(line)

    try:
        return _COMMANDS[args.command](args, out)
    except IngestError as exc:
        print(exc.render(), file=sys.stderr)
        return EXIT_INGEST
    except OracleTooLarge as exc:
        print(f"eventflow: {exc}", file=sys.stderr)
        return EXIT_TOO_LARGE
    except (ConfigError, SpecMismatch) as exc:
        print(f"eventflow: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
