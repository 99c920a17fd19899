"""Descriptive outputs over a gold dataset: per-goal coverage percentages,
requirement occurrence rankings, totals, and deterministic file export.
"""

import csv
import io
import json
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

from .errors import EmptyGold, IoError
from .taxonomy import Taxonomy, requirements_by_goal


@dataclass(frozen=True)
class CoverageRow:
    goal_id: int
    goal_name: str
    n_requirements: int
    pct_occurrence: float

    def as_dict(self) -> dict:
        return {
            "goal_id": self.goal_id,
            "goal_name": self.goal_name,
            "n_requirements": self.n_requirements,
            "pct_occurrence": self.pct_occurrence,
        }


def _entries(gold) -> dict:
    return gold.entries if hasattr(gold, "entries") else gold


def coverage_by_goal(gold, taxonomy: Taxonomy) -> list[CoverageRow]:
    """Percent of gold issues whose labels touch each goal, by goal id.

    Rows can sum past 100 because one issue may carry labels from
    several goals.
    """
    entries = _entries(gold)
    if not entries:
        raise EmptyGold("coverage needs a non-empty gold dataset")
    n = len(entries)
    rows = []
    for goal in sorted(taxonomy.goals, key=lambda g: g.id):
        members = {r.id for r in requirements_by_goal(taxonomy, goal.id)}
        touched = sum(1 for labels in entries.values() if members & set(labels))
        rows.append(CoverageRow(
            goal_id=goal.id,
            goal_name=goal.name,
            n_requirements=len(members),
            pct_occurrence=100.0 * touched / n,
        ))
    return rows


def top_requirements(gold, n: int) -> list[tuple[str, int]]:
    """Requirements ranked by the number of issues containing them,
    count descending, ties by ascending numeric id. Only nonzero counts."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    counts: dict[str, int] = {}
    for labels in _entries(gold).values():
        for label in labels:
            counts[label] = counts.get(label, 0) + 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], _numeric(kv[0])))
    return ranked[:n]


def _numeric(label: str) -> int:
    tail = label[1:]
    return int(tail) if tail.isdigit() else 0


def total_occurrences(gold) -> int:
    """Sum of label-set sizes over all gold issues."""
    return sum(len(labels) for labels in _entries(gold).values())


def format_pct(value: float) -> str:
    """Two decimals, half-up, matching the presentation of percentages."""
    return str(Decimal(repr(value)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def _coverage_csv(rows) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["goal_id", "goal_name", "n_requirements", "pct_occurrence"])
    for row in rows:
        writer.writerow([row.goal_id, row.goal_name, row.n_requirements,
                         format_pct(row.pct_occurrence)])
    return out.getvalue()


def _ranking_csv(ranking) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["requirement_id", "occurrence_count"])
    for requirement_id, count in ranking:
        writer.writerow([requirement_id, count])
    return out.getvalue()


def export_report(data, format: str, path) -> Path:
    """Write coverage rows or a ranking as CSV (always with header) or a
    JSON array; identical input produces identical bytes."""
    path = Path(path)
    if format == "json":
        payload = [d.as_dict() if hasattr(d, "as_dict") else _ranking_entry(d) for d in data]
        text = json.dumps(payload, sort_keys=True, ensure_ascii=False, indent=2) + "\n"
    elif format == "csv":
        items = list(data)
        if items and isinstance(items[0], CoverageRow):
            text = _coverage_csv(items)
        else:
            text = _ranking_csv(items)
    else:
        raise ValueError(f"unknown report format {format!r}")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return path


def _ranking_entry(item) -> dict:
    requirement_id, count = item
    return {"requirement_id": requirement_id, "occurrence_count": count}


def summary(gold, taxonomy: Taxonomy) -> dict:
    entries = _entries(gold)
    return {
        "n_issues": len(entries),
        "total_occurrences": total_occurrences(gold),
        "issues_with_labels": sum(1 for ls in entries.values() if ls),
        "coverage": [r.as_dict() for r in coverage_by_goal(gold, taxonomy)] if entries else [],
    }
