"""Taxonomy loading, validation, queries, and mutation rejection.

Mutation fixtures are derived from the canonical file at test time so
they always track the shipped data.
"""

import copy
import json
import time

import pytest

from privreq.errors import NotFound, ParseError, UnknownGoal, ValidationError
from privreq.taxonomy import (
    canonical_path,
    load_canonical,
    load_taxonomy,
    lookup_requirement,
    parse_requirement_id,
    requirements_by_goal,
    validate,
)

EXPECTED_GOAL_COUNTS = {1: 35, 2: 6, 3: 4, 4: 7, 5: 4, 6: 8, 7: 7}


@pytest.fixture(scope="module")
def canonical_doc():
    with open(canonical_path(), encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture(scope="module")
def taxonomy():
    return load_canonical()


class TestCanonicalFile:
    def test_counts(self, taxonomy):
        assert len(taxonomy.requirements) == 71
        assert len(taxonomy.goals) == 7

    def test_per_goal_counts(self, taxonomy):
        got = {g.id: len(requirements_by_goal(taxonomy, g.id)) for g in taxonomy.goals}
        assert got == EXPECTED_GOAL_COUNTS

    def test_expected_counts_present(self, taxonomy):
        for g in taxonomy.goals:
            assert g.expected_requirement_count == EXPECTED_GOAL_COUNTS[g.id]

    def test_lookup_roundtrip(self, taxonomy):
        for r in taxonomy.requirements:
            assert lookup_requirement(taxonomy, r.id) is r

    def test_erasure_requirement_text(self, taxonomy):
        r = lookup_requirement(taxonomy, "R44")
        assert r.text == "ALLOW the data subjects to erase their personal data"
        assert r.goal_id == 4

    def test_r22_goal(self, taxonomy):
        assert lookup_requirement(taxonomy, "R22").goal_id == 1

    def test_goal3_membership(self, taxonomy):
        ids = [r.id for r in requirements_by_goal(taxonomy, 3)]
        assert len(ids) == 4
        for rid in ("R41", "R43", "R53"):
            assert rid in ids

    def test_by_goal_ordering(self, taxonomy):
        for gid in range(1, 8):
            nums = [r.numeric_id for r in requirements_by_goal(taxonomy, gid)]
            assert nums == sorted(nums)

    def test_by_goal_partition(self, taxonomy):
        total = sum(len(requirements_by_goal(taxonomy, gid)) for gid in range(1, 8))
        assert total == 71

    def test_unknown_goal(self, taxonomy):
        with pytest.raises(UnknownGoal):
            requirements_by_goal(taxonomy, 0)
        with pytest.raises(UnknownGoal):
            requirements_by_goal(taxonomy, 8)

    def test_lookup_missing(self, taxonomy):
        with pytest.raises(NotFound):
            lookup_requirement(taxonomy, "R99")

    def test_keywords_lowercase(self, taxonomy):
        for r in taxonomy.requirements:
            for kw in r.keywords:
                assert kw == kw.lower()


class TestParseRequirementId:
    def test_valid(self):
        assert parse_requirement_id("R1") == 1
        assert parse_requirement_id("R71") == 71

    def test_format(self):
        for bad in ("X4", "R", "44", "r44", "R04x"):
            with pytest.raises(ValidationError) as exc:
                parse_requirement_id(bad)
            assert exc.value.rule == "id format"

    def test_range(self):
        for bad in ("R0", "R72", "R99"):
            with pytest.raises(ValidationError) as exc:
                parse_requirement_id(bad)
            assert exc.value.rule == "id out of range"


def mutate(doc, fn):
    clone = copy.deepcopy(doc)
    fn(clone)
    return clone


def _dup_id(d):
    d["requirements"][1]["id"] = d["requirements"][0]["id"]


def _bad_verb(d):
    d["requirements"][0]["action_verb"] = "DESTROY"


def _missing_goal(d):
    del d["goals"][2]


def _count_mismatch(d):
    d["goals"][0]["expected_requirement_count"] += 1


def _empty_complement(d):
    d["requirements"][5]["complement"] = "  "


def _empty_sources(d):
    d["requirements"][3]["sources"] = []


def _dangling_goal_ref(d):
    # all 7 goals remain: trips the reference check, not the id-set check
    d["requirements"][4]["goal_id"] = 9


def _dup_goal_name(d):
    d["goals"][1]["name"] = d["goals"][0]["name"]


def _bad_regulation(d):
    d["requirements"][2]["sources"][0]["regulation"] = "CCPA"


def _uppercase_keyword(d):
    d["requirements"][0]["keywords"] = ["Valid"]


def _missing_field(d):
    del d["requirements"][7]["complement"]


def _bad_id_format(d):
    d["requirements"][6]["id"] = "Q6"


MUTATIONS = [
    (_dup_id, "duplicate id"),
    (_bad_verb, "unknown action verb"),
    (_missing_goal, "goal ids"),
    (_count_mismatch, "count mismatch"),
    (_empty_complement, "empty complement"),
    (_empty_sources, "empty sources"),
    (_dangling_goal_ref, "unknown goal"),
    (_dup_goal_name, "duplicate goal name"),
    (_bad_regulation, "unknown regulation"),
    (_uppercase_keyword, "keyword case"),
    (_missing_field, "missing field"),
    (_bad_id_format, "id format"),
]


class TestMutationRejection:
    def test_canonical_accepted(self, canonical_doc):
        validate(canonical_doc)

    @pytest.mark.parametrize("fn,rule", MUTATIONS, ids=[r for _, r in MUTATIONS])
    def test_mutation_rejected_with_named_rule(self, canonical_doc, fn, rule):
        doc = mutate(canonical_doc, fn)
        with pytest.raises(ValidationError) as exc:
            validate(doc)
        assert exc.value.rule == rule

    def test_suite_is_fast(self, canonical_doc):
        start = time.monotonic()
        validate(canonical_doc)
        for fn, _ in MUTATIONS:
            with pytest.raises(ValidationError):
                validate(mutate(canonical_doc, fn))
        assert time.monotonic() - start < 1.0


class TestLoadErrors:
    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            load_taxonomy(tmp_path / "nope.json")

    def test_malformed_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json", encoding="utf-8")
        with pytest.raises(ParseError):
            load_taxonomy(p)

    def test_load_canonical_path(self):
        t = load_taxonomy(canonical_path())
        assert len(t.requirements) == 71
