"""Load, validate, and query the privacy-requirements taxonomy.

The taxonomy is a single JSON document with ``version``, ``goals`` and
``requirements`` arrays.  The canonical file bundled under
``privreq/data/taxonomy.json`` holds the full set of 71 requirements in
7 goal categories; entries not quoted verbatim from the published table
are flagged ``"reconstructed": true``.

Taxonomy values are immutable after load and safe to share between
threads.
"""

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

from .errors import NotFound, ParseError, UnknownGoal, ValidationError

# Controlled action-verb vocabulary.  ENSURE is admitted alongside the
# base list because requirement R65 uses it.
ACTION_VERBS = frozenset({
    "ALLOW", "ARCHIVE", "COLLECT", "ERASE", "IMPLEMENT", "INFORM",
    "MAINTAIN", "NOTIFY", "OBTAIN", "PRESENT", "PROTECT", "PROVIDE",
    "REQUEST", "SHOW", "STORE", "TRANSMIT", "USE", "ENSURE",
})

GOAL_IDS = frozenset(range(1, 8))

_REQ_ID_RE = re.compile(r"^R(0|[1-9]\d*)$")

REGULATIONS = frozenset({"GDPR", "ISO29100"})


@dataclass(frozen=True)
class Source:
    regulation: str
    clause: str


@dataclass(frozen=True)
class PrivacyGoal:
    id: int
    name: str
    description: str
    expected_requirement_count: Optional[int] = None


@dataclass(frozen=True)
class PrivacyRequirement:
    id: str
    action_verb: str
    complement: str
    goal_id: int
    sources: tuple[Source, ...]
    keywords: tuple[str, ...]
    merged_from: tuple[str, ...] = ()
    object: Optional[str] = None
    reconstructed: bool = False

    @property
    def numeric_id(self) -> int:
        return int(self.id[1:])

    @property
    def text(self) -> str:
        """The requirement rendered in its verb/object/complement pattern."""
        parts = [self.action_verb]
        if self.object:
            parts.append(self.object)
        parts.append(self.complement)
        return " ".join(parts)


@dataclass(frozen=True)
class Taxonomy:
    version: str
    goals: tuple[PrivacyGoal, ...]
    requirements: tuple[PrivacyRequirement, ...]
    notes: tuple[str, ...] = ()
    _by_id: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_by_id", {r.id: r for r in self.requirements})

    def find(self, req_id: str):
        """The requirement with that id, or None."""
        return self._by_id.get(req_id)

    def __contains__(self, req_id: str) -> bool:
        return req_id in self._by_id


def parse_requirement_id(req_id: str) -> int:
    """Return the numeric part of a requirement id, validating format and range."""
    m = _REQ_ID_RE.match(req_id) if isinstance(req_id, str) else None
    if not m:
        raise ValidationError("id format", f"requirement id {req_id!r} does not match R<integer>")
    n = int(m.group(1))
    if not 1 <= n <= 71:
        raise ValidationError("id out of range", f"requirement id {req_id} outside R1..R71")
    return n


def _require(record: dict, name: str, context: str):
    if name not in record or record[name] is None:
        raise ValidationError("missing field", f"{context} lacks {name!r}")
    return record[name]


def _parse_goal(record: dict) -> PrivacyGoal:
    gid = _require(record, "id", "goal")
    name = _require(record, "name", f"goal {gid}")
    description = _require(record, "description", f"goal {gid}")
    expected = record.get("expected_requirement_count")
    if expected is not None and (not isinstance(expected, int) or expected < 0):
        raise ValidationError("invalid count", f"goal {gid} expected_requirement_count must be a non-negative integer")
    return PrivacyGoal(id=gid, name=name, description=description,
                       expected_requirement_count=expected)


def _parse_requirement(record: dict) -> PrivacyRequirement:
    rid = _require(record, "id", "requirement")
    parse_requirement_id(rid)
    verb = _require(record, "action_verb", rid)
    if verb not in ACTION_VERBS:
        raise ValidationError("unknown action verb", f"{rid} uses {verb!r}")
    complement = _require(record, "complement", rid)
    if not str(complement).strip():
        raise ValidationError("empty complement", rid)
    goal_id = _require(record, "goal_id", rid)
    raw_sources = _require(record, "sources", rid)
    if not raw_sources:
        raise ValidationError("empty sources", rid)
    sources = []
    for s in raw_sources:
        reg = _require(s, "regulation", f"{rid} source")
        if reg not in REGULATIONS:
            raise ValidationError("unknown regulation", f"{rid} cites {reg!r}")
        sources.append(Source(regulation=reg, clause=_require(s, "clause", f"{rid} source")))
    keywords = tuple(record.get("keywords", ()))
    for kw in keywords:
        if kw != kw.lower():
            raise ValidationError("keyword case", f"{rid} keyword {kw!r} is not lowercase")
    return PrivacyRequirement(
        id=rid,
        action_verb=verb,
        object=record.get("object"),
        complement=complement,
        goal_id=goal_id,
        sources=tuple(sources),
        keywords=keywords,
        merged_from=tuple(record.get("merged_from", ())),
        reconstructed=bool(record.get("reconstructed", False)),
    )


def validate(doc: dict) -> Taxonomy:
    """Build a Taxonomy from a parsed document, checking every invariant.

    Raises ValidationError naming the first violated rule.
    """
    if not isinstance(doc, dict):
        raise ValidationError("document shape", "top level must be an object")
    version = _require(doc, "version", "document")
    goals = [_parse_goal(g) for g in _require(doc, "goals", "document")]

    goal_ids = [g.id for g in goals]
    if sorted(goal_ids) != sorted(GOAL_IDS):
        raise ValidationError("goal ids", f"goal ids must be exactly 1..7, got {sorted(goal_ids)}")
    names = [g.name for g in goals]
    for name in names:
        if names.count(name) > 1:
            raise ValidationError("duplicate goal name", name)

    requirements = [_parse_requirement(r) for r in _require(doc, "requirements", "document")]

    seen: set[str] = set()
    for r in requirements:
        if r.id in seen:
            raise ValidationError("duplicate id", r.id)
        seen.add(r.id)
        if r.goal_id not in GOAL_IDS:
            raise ValidationError("unknown goal", f"{r.id} references goal {r.goal_id}")

    by_goal: dict[int, int] = {g.id: 0 for g in goals}
    for r in requirements:
        by_goal[r.goal_id] += 1
    for g in goals:
        if g.expected_requirement_count is not None and by_goal[g.id] != g.expected_requirement_count:
            raise ValidationError(
                "count mismatch",
                f"goal {g.id} has {by_goal[g.id]} requirements, expected {g.expected_requirement_count}",
            )

    return Taxonomy(
        version=version,
        goals=tuple(sorted(goals, key=lambda g: g.id)),
        requirements=tuple(sorted(requirements, key=lambda r: r.numeric_id)),
        notes=tuple(doc.get("notes", ())),
    )


def load_taxonomy(path) -> Taxonomy:
    """Load and validate a taxonomy JSON document from ``path``."""
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e}") from e
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: {e}") from e
    return validate(doc)


def canonical_path() -> Path:
    """Filesystem path of the bundled canonical taxonomy file."""
    return Path(str(resources.files("privreq").joinpath("data/taxonomy.json")))


def load_canonical() -> Taxonomy:
    return load_taxonomy(canonical_path())


def lookup_requirement(taxonomy: Taxonomy, req_id: str) -> PrivacyRequirement:
    """Return the requirement with the given id, or raise NotFound."""
    try:
        return taxonomy._by_id[req_id]
    except KeyError:
        raise NotFound(f"no requirement {req_id}") from None


def requirements_by_goal(taxonomy: Taxonomy, goal_id: int) -> list[PrivacyRequirement]:
    """All requirements of one goal, ordered by ascending numeric id."""
    if goal_id not in GOAL_IDS:
        raise UnknownGoal(f"goal {goal_id} does not exist")
    return [r for r in taxonomy.requirements if r.goal_id == goal_id]
