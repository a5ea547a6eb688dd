"""JSON report documents tying stats, classes, verdicts and oracle results together."""

from __future__ import annotations

import json
from importlib.resources import files
from typing import Optional

from .check import Verdict
from .stats import ReductionStats
from .traces import BijectionReport, EventTrace

REPORT_SCHEMA_ID = "eventflow.report/1"


def load_schema(name: str) -> dict:
    """A shipped JSON schema: ``"report"`` or ``"graph"``."""
    text = (files("eventflow") / "schemas" / f"{name}-1.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def oracle_section(report: BijectionReport, k: int, verdicts_agree: bool) -> dict:
    section = report.to_dict()
    section["k"] = k
    section["verdicts_agree"] = verdicts_agree
    section["ok"] = report.ok and verdicts_agree
    return section


def build_report(
    graph_id: str,
    stats: ReductionStats,
    classes: list[EventTrace],
    verdicts: list[Verdict],
    oracle: Optional[dict] = None,
) -> dict:
    return {
        "schema": REPORT_SCHEMA_ID,
        "graph_id": graph_id,
        "stats": stats.to_dict(),
        "classes": [str(t) for t in classes],
        "verdicts": [v.to_dict() for v in verdicts],
        "oracle": oracle,
    }
