"""Coverage percentages, occurrence rankings, and deterministic exports."""

import pytest

from privreq.errors import EmptyGold
from privreq.reporting import (
    coverage_by_goal,
    export_report,
    format_pct,
    summary,
    top_requirements,
    total_occurrences,
)
from privreq.taxonomy import load_canonical, requirements_by_goal

TAXONOMY = load_canonical()


def goal_member(goal_id, index=0):
    return requirements_by_goal(TAXONOMY, goal_id)[index].id


class TestCoverage:
    def test_single_goal_full_coverage(self):
        r = goal_member(1)
        gold = {f"i{k}": frozenset({r}) for k in range(5)}
        rows = coverage_by_goal(gold, TAXONOMY)
        assert rows[0].goal_id == 1
        assert rows[0].pct_occurrence == 100.0
        assert all(row.pct_occurrence == 0.0 for row in rows[1:])

    def test_partial_coverage(self):
        member = goal_member(4)
        gold = {f"i{k}": frozenset({member}) if k < 4 else frozenset()
                for k in range(10)}
        rows = coverage_by_goal(gold, TAXONOMY)
        goal4 = next(r for r in rows if r.goal_id == 4)
        assert goal4.pct_occurrence == pytest.approx(40.0)

    def test_rows_ordered_by_goal_id(self):
        gold = {"i": frozenset({goal_member(3)})}
        rows = coverage_by_goal(gold, TAXONOMY)
        assert [r.goal_id for r in rows] == [1, 2, 3, 4, 5, 6, 7]
        assert [r.n_requirements for r in rows] == [35, 6, 4, 7, 4, 8, 7]

    def test_multi_goal_issue_counts_everywhere(self):
        gold = {"i": frozenset({goal_member(1), goal_member(2)})}
        rows = coverage_by_goal(gold, TAXONOMY)
        assert rows[0].pct_occurrence == 100.0
        assert rows[1].pct_occurrence == 100.0

    def test_empty_gold(self):
        with pytest.raises(EmptyGold):
            coverage_by_goal({}, TAXONOMY)

    def test_percentages_bounded(self):
        gold = {f"i{k}": frozenset({goal_member(k % 7 + 1)}) for k in range(13)}
        for row in coverage_by_goal(gold, TAXONOMY):
            assert 0.0 <= row.pct_occurrence <= 100.0


class TestTopRequirements:
    def test_counting_and_order(self):
        gold = {}
        for k in range(5):
            gold[f"a{k}"] = frozenset({"R44"})
        for k in range(3):
            gold[f"b{k}"] = frozenset({"R1"})
        assert top_requirements(gold, 10) == [("R44", 5), ("R1", 3)]

    def test_ties_ascending_id(self):
        gold = {"x": frozenset({"R10", "R2"})}
        assert top_requirements(gold, 5) == [("R2", 1), ("R10", 1)]

    def test_empty(self):
        assert top_requirements({}, 3) == []

    def test_length_capped_by_nonzero(self):
        gold = {"x": frozenset({"R1"})}
        assert len(top_requirements(gold, 10)) == 1

    def test_counts_sum_to_total(self):
        gold = {
            "a": frozenset({"R1", "R2"}),
            "b": frozenset({"R2"}),
            "c": frozenset(),
        }
        ranked = top_requirements(gold, 71)
        assert sum(c for _, c in ranked) == total_occurrences(gold)


class TestTotals:
    def test_sizes(self):
        gold = {"a": frozenset({"R1"}), "b": frozenset({"R1", "R2"}),
                "c": frozenset({"R3", "R4", "R5"})}
        assert total_occurrences(gold) == 6

    def test_empty(self):
        assert total_occurrences({}) == 0


class TestFormatting:
    def test_two_decimals_half_up(self):
        assert format_pct(0.125) == "0.13"
        assert format_pct(2.675) == "2.68"
        assert format_pct(40.0) == "40.00"
        assert format_pct(47.205) == "47.21"  # half rounds away from zero

    def test_plain_values(self):
        assert format_pct(100.0) == "100.00"
        assert format_pct(0.0) == "0.00"


class TestExport:
    def test_coverage_csv_shape(self, tmp_path):
        gold = {"i": frozenset({goal_member(1)})}
        rows = coverage_by_goal(gold, TAXONOMY)
        path = export_report(rows, "csv", tmp_path / "coverage.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "goal_id,goal_name,n_requirements,pct_occurrence"
        assert len(lines) == 8
        assert lines[1].endswith("100.00")

    def test_ranking_csv_header_only_when_empty(self, tmp_path):
        path = export_report([], "csv", tmp_path / "top.csv")
        assert path.read_text() == "requirement_id,occurrence_count\n"

    def test_deterministic_bytes(self, tmp_path):
        gold = {"i": frozenset({goal_member(2)})}
        rows = coverage_by_goal(gold, TAXONOMY)
        p1 = export_report(rows, "csv", tmp_path / "a.csv")
        p2 = export_report(rows, "csv", tmp_path / "b.csv")
        assert p1.read_bytes() == p2.read_bytes()
        j1 = export_report(rows, "json", tmp_path / "a.json")
        j2 = export_report(rows, "json", tmp_path / "b.json")
        assert j1.read_bytes() == j2.read_bytes()

    def test_json_ranking(self, tmp_path):
        import json

        path = export_report([("R44", 5)], "json", tmp_path / "top.json")
        data = json.loads(path.read_text())
        assert data == [{"occurrence_count": 5, "requirement_id": "R44"}]

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            export_report([], "xml", tmp_path / "x.xml")


class TestSummary:
    def test_fields(self):
        gold = {"a": frozenset({"R1"}), "b": frozenset()}
        s = summary(gold, TAXONOMY)
        assert s["n_issues"] == 2
        assert s["total_occurrences"] == 1
        assert s["issues_with_labels"] == 1
        assert len(s["coverage"]) == 7
