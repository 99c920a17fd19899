"""Multi-coder annotation sessions: assignment plans, label recording,
disagreement detection, resolution, and gold export.
"""

import hashlib
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

from .errors import (
    EmptyCorpus,
    InsufficientCoders,
    InvalidCombination,
    InvalidPlan,
    NoDisagreement,
    NotAssigned,
    NotFound,
    UnknownRequirement,
    UnresolvedDisagreements,
)
from .reliability import fleiss_kappa, get_distance, krippendorff_alpha
from .store import (
    Corpus,
    ProjectLock,
    append_ndjson,
    ensure_layout,
    read_json,
    read_ndjson,
    save_gold,
    write_json,
    write_ndjson,
)
from .taxonomy import Taxonomy


@dataclass(frozen=True)
class AnnotationRecord:
    session_id: str
    coder_id: str
    issue_key: str
    labels: frozenset
    annotated_at: datetime
    note: Optional[str] = None

    def as_dict(self) -> dict:
        record = {
            "session_id": self.session_id,
            "coder_id": self.coder_id,
            "issue_key": self.issue_key,
            "labels": sorted(self.labels, key=_rid_sort_key),
            "annotated_at": self.annotated_at.isoformat(),
        }
        if self.note:
            record["note"] = self.note
        return record


@dataclass(frozen=True)
class Disagreement:
    issue_key: str
    by_coder: dict
    status: str  # open | resolved

    def as_dict(self) -> dict:
        return {
            "issue_key": self.issue_key,
            "by_coder": {c: sorted(ls, key=_rid_sort_key) for c, ls in sorted(self.by_coder.items())},
            "status": self.status,
        }


@dataclass(frozen=True)
class Resolution:
    issue_key: str
    final_labels: frozenset
    method: str  # combined | reclassified
    notes: str = ""

    def as_dict(self) -> dict:
        return {
            "issue_key": self.issue_key,
            "final_labels": sorted(self.final_labels, key=_rid_sort_key),
            "method": self.method,
            "notes": self.notes,
        }


@dataclass(frozen=True)
class GoldDataset:
    name: str
    entries: dict  # issue_key -> frozenset of requirement ids


@dataclass(frozen=True)
class Session:
    session_id: str
    corpus_name: str
    coders: tuple
    plan: dict
    assignments: dict  # coder_id -> tuple of issue_keys
    issue_keys: tuple

    def assigned_to(self, coder_id: str) -> tuple:
        return self.assignments.get(coder_id, ())

    def as_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "corpus_name": self.corpus_name,
            "coders": list(self.coders),
            "plan": self.plan,
            "assignments": {c: list(keys) for c, keys in self.assignments.items()},
            "issue_keys": list(self.issue_keys),
        }


def _rid_sort_key(label: str):
    tail = label[1:]
    return (0, int(tail)) if label[:1] == "R" and tail.isdigit() else (1, label)


def _chunks(items: Sequence, n: int) -> list[list]:
    """n nearly-equal contiguous chunks; earlier chunks take the remainder."""
    size, extra = divmod(len(items), n)
    out = []
    start = 0
    for i in range(n):
        end = start + size + (1 if i < extra else 0)
        out.append(list(items[start:end]))
        start = end
    return out


def plan_assignments(issue_keys: Sequence[str], coders: Sequence[str], plan: dict) -> dict:
    kind = plan.get("kind")
    if kind == "all-to-all":
        return {c: tuple(issue_keys) for c in coders}
    if kind == "split-halves":
        primary = plan.get("primary_coder")
        if primary not in coders:
            raise InvalidPlan(f"primary coder {primary!r} is not in the coder list")
        others = [c for c in coders if c != primary]
        if not others:
            raise InvalidPlan("split-halves needs at least two coders")
        assignments = {primary: tuple(issue_keys)}
        for coder, chunk in zip(others, _chunks(list(issue_keys), len(others))):
            assignments[coder] = tuple(chunk)
        return assignments
    if kind == "explicit":
        table = plan.get("assignments")
        if not isinstance(table, dict):
            raise InvalidPlan("explicit plan requires an assignments map")
        known = set(issue_keys)
        assignments = {}
        for coder, keys in table.items():
            if coder not in coders:
                raise InvalidPlan(f"assignment references unknown coder {coder!r}")
            for key in keys:
                if key not in known:
                    raise InvalidPlan(f"assignment references unknown issue {key!r}")
            assignments[coder] = tuple(keys)
        covered = {k for keys in assignments.values() for k in keys}
        missing = known - covered
        if missing:
            raise InvalidPlan(f"{len(missing)} issues have no assigned coder")
        return assignments
    raise InvalidPlan(f"unknown plan kind {kind!r}")


def create_session(project_dir, corpus: Corpus, coders: Sequence[str], plan: dict,
                   session_id: Optional[str] = None) -> Session:
    """Create and persist a session; every issue gets at least one coder."""
    if not corpus.issues:
        raise EmptyCorpus(corpus.name)
    if not coders:
        raise InvalidPlan("at least one coder is required")
    if len(set(coders)) != len(coders):
        raise InvalidPlan("duplicate coder ids")
    issue_keys = tuple(sorted(i.key for i in corpus.issues))
    assignments = plan_assignments(issue_keys, coders, plan)
    if session_id is None:
        digest = hashlib.sha256(json.dumps(
            [corpus.name, list(coders), plan], sort_keys=True).encode()).hexdigest()
        session_id = f"s-{digest[:10]}"
    session = Session(
        session_id=session_id,
        corpus_name=corpus.name,
        coders=tuple(coders),
        plan=plan,
        assignments=assignments,
        issue_keys=issue_keys,
    )
    root = ensure_layout(project_dir)
    with ProjectLock(project_dir):
        write_json(root / "annotations" / f"{session_id}.meta.json", session.as_dict())
        annotations_path = root / "annotations" / f"{session_id}.ndjson"
        if not annotations_path.exists():
            write_ndjson(annotations_path, [])
    return session


def load_session(project_dir, session_id: str) -> Session:
    meta_path = Path(project_dir) / "annotations" / f"{session_id}.meta.json"
    if not meta_path.exists():
        raise NotFound(f"session {session_id!r} in {project_dir}")
    doc = read_json(meta_path)
    return Session(
        session_id=doc["session_id"],
        corpus_name=doc["corpus_name"],
        coders=tuple(doc["coders"]),
        plan=doc["plan"],
        assignments={c: tuple(keys) for c, keys in doc["assignments"].items()},
        issue_keys=tuple(doc["issue_keys"]),
    )


def list_sessions(project_dir) -> list[str]:
    annotations_dir = Path(project_dir) / "annotations"
    if not annotations_dir.exists():
        return []
    return sorted(p.stem.removesuffix(".meta") for p in annotations_dir.glob("*.meta.json"))


def load_annotations(project_dir, session_id: str) -> dict:
    """Effective labels after last-write-wins: issue_key -> coder -> frozenset."""
    path = Path(project_dir) / "annotations" / f"{session_id}.ndjson"
    state: dict[str, dict[str, frozenset]] = {}
    if not path.exists():
        return state
    for record in read_ndjson(path):
        per_issue = state.setdefault(record["issue_key"], {})
        per_issue[record["coder_id"]] = frozenset(record.get("labels", ()))
    return state


def load_resolutions(project_dir, session_id: str) -> dict:
    """Latest resolution per issue: issue_key -> Resolution."""
    path = Path(project_dir) / "resolutions" / f"{session_id}.ndjson"
    out: dict[str, Resolution] = {}
    if not path.exists():
        return out
    for record in read_ndjson(path):
        out[record["issue_key"]] = Resolution(
            issue_key=record["issue_key"],
            final_labels=frozenset(record.get("final_labels", ())),
            method=record["method"],
            notes=record.get("notes", ""),
        )
    return out


def record_label(project_dir, session: Session, coder_id: str, issue_key: str,
                 labels, taxonomy: Taxonomy, annotated_at: Optional[datetime] = None,
                 note: Optional[str] = None) -> AnnotationRecord:
    """Persist one coder's label set for one issue, superseding any prior
    record by the same coder. An empty set is a legal annotation."""
    if issue_key not in session.assigned_to(coder_id):
        raise NotAssigned(f"coder {coder_id!r} is not assigned issue {issue_key!r}")
    labels = frozenset(labels)
    for label in labels:
        if taxonomy.find(label) is None:
            raise UnknownRequirement(label)
    record = AnnotationRecord(
        session_id=session.session_id,
        coder_id=coder_id,
        issue_key=issue_key,
        labels=labels,
        annotated_at=annotated_at or datetime.now(timezone.utc),
        note=note,
    )
    path = Path(project_dir) / "annotations" / f"{session.session_id}.ndjson"
    with ProjectLock(project_dir):
        append_ndjson(path, record.as_dict())
    return record


def detect_disagreements(project_dir, session: Session) -> list[Disagreement]:
    """Issues where at least two coders' label sets differ, by issue key."""
    annotations = load_annotations(project_dir, session.session_id)
    resolutions = load_resolutions(project_dir, session.session_id)
    out = []
    for issue_key in sorted(annotations):
        per_coder = annotations[issue_key]
        if len(per_coder) < 2:
            continue
        values = list(per_coder.values())
        if all(v == values[0] for v in values[1:]):
            continue
        status = "resolved" if issue_key in resolutions else "open"
        out.append(Disagreement(issue_key=issue_key, by_coder=dict(per_coder), status=status))
    return out


def record_resolution(project_dir, session: Session, issue_key: str, method: str,
                      final_labels=None, notes: str = "",
                      taxonomy: Optional[Taxonomy] = None) -> Resolution:
    """Resolve one open disagreement by combining (union) or reclassifying."""
    disagreements = {d.issue_key: d for d in detect_disagreements(project_dir, session)}
    if issue_key not in disagreements:
        raise NoDisagreement(issue_key)
    by_coder = disagreements[issue_key].by_coder
    union = frozenset().union(*by_coder.values())
    if method == "combined":
        if final_labels is not None and frozenset(final_labels) != union:
            raise InvalidCombination(
                f"combined labels for {issue_key} must equal the union of coder sets")
        final = union
    elif method == "reclassified":
        final = frozenset(final_labels or ())
        if taxonomy is not None:
            for label in final:
                if label not in taxonomy:
                    raise UnknownRequirement(label)
    else:
        raise InvalidCombination(f"unknown resolution method {method!r}")
    resolution = Resolution(issue_key=issue_key, final_labels=final,
                            method=method, notes=notes)
    path = Path(project_dir) / "resolutions" / f"{session.session_id}.ndjson"
    with ProjectLock(project_dir):
        append_ndjson(path, resolution.as_dict())
    return resolution


def export_gold(project_dir, session: Session, name: str) -> GoldDataset:
    """Final labels per annotated issue: the agreed set where coders agreed,
    the recorded resolution otherwise. Requires all disagreements resolved."""
    open_items = [d for d in detect_disagreements(project_dir, session)
                  if d.status == "open"]
    if open_items:
        raise UnresolvedDisagreements(len(open_items))
    annotations = load_annotations(project_dir, session.session_id)
    resolutions = load_resolutions(project_dir, session.session_id)
    entries = {}
    for issue_key, per_coder in annotations.items():
        if issue_key in resolutions:
            entries[issue_key] = resolutions[issue_key].final_labels
        else:
            # all present coders agree (or a single coder labeled it)
            entries[issue_key] = next(iter(per_coder.values()))
    gold = GoldDataset(name=name, entries=entries)
    with ProjectLock(project_dir):
        save_gold(project_dir, name, entries)
    return gold


def total_agreement_rate(project_dir, session: Session) -> float:
    """Share of multiply-annotated issues whose label sets are all equal."""
    if len(session.coders) < 2:
        raise InsufficientCoders("total agreement needs at least two coders")
    annotations = load_annotations(project_dir, session.session_id)
    multi = {k: v for k, v in annotations.items() if len(v) >= 2}
    if not multi:
        raise InsufficientCoders("no issue has two or more annotations")
    agreed = 0
    for per_coder in multi.values():
        values = list(per_coder.values())
        if all(v == values[0] for v in values[1:]):
            agreed += 1
    return agreed / len(multi)


def session_units(project_dir, session: Session) -> dict:
    """Annotation state shaped for the reliability coefficients."""
    return load_annotations(project_dir, session.session_id)


def session_irr(project_dir, session: Session, metric: str = "alpha",
                distance: str = "masi"):
    """Inter-rater reliability over the session's current annotations.

    alpha uses the named set distance over all items with 2+ annotations;
    fleiss treats each distinct label set as one nominal category over the
    items annotated by every coder.
    """
    units = session_units(project_dir, session)
    if metric == "alpha":
        fn = get_distance(distance)
        return krippendorff_alpha(units, fn, distance_name=distance)
    if metric == "fleiss":
        full = {k: v for k, v in units.items() if len(v) == len(session.coders)}
        categories = sorted(
            {labels for per_coder in full.values() for labels in per_coder.values()},
            key=lambda s: sorted(s, key=_rid_sort_key),
        )
        index = {c: i for i, c in enumerate(categories)}
        matrix = []
        for per_coder in full.values():
            row = [0] * len(categories)
            for labels in per_coder.values():
                row[index[labels]] += 1
            matrix.append(row)
        return fleiss_kappa(matrix)
    raise ValueError(f"unknown metric {metric!r}")
