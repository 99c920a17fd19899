"""Project-directory persistence: corpora, annotations, resolutions, gold
datasets, and reports as deterministic newline-delimited JSON.
"""

import json
import os
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Optional, Sequence

from .errors import IoError, LockHeld, NotFound, ParseError, ValidationError
from .ingestion import FilterCriteria, IssueReport, parse_timestamp

LOCK_FILENAME = ".privreq.lock"

SUBDIRS = ("corpora", "annotations", "resolutions", "gold", "reports")


def ensure_layout(project_dir) -> Path:
    root = Path(project_dir)
    try:
        for sub in SUBDIRS:
            (root / sub).mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create project layout under {root}: {exc}") from exc
    return root


@dataclass(frozen=True)
class Corpus:
    name: str
    issues: tuple
    filter_provenance: dict = field(default_factory=dict)
    created_at: Optional[datetime] = None

    def __post_init__(self):
        seen = set()
        for issue in self.issues:
            key = (issue.source, issue.external_id)
            if key in seen:
                raise ValidationError("duplicate issue key", f"{key[0]}:{key[1]}")
            seen.add(key)

    def __len__(self):
        return len(self.issues)


def _dump_line(record: dict) -> str:
    return json.dumps(record, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def write_ndjson(path, records: Sequence[dict]) -> Path:
    """Write records one JSON object per line, LF endings, stable key order."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for record in records:
                fh.write(_dump_line(record))
                fh.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return path


def append_ndjson(path, record: dict) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "a", encoding="utf-8", newline="\n") as fh:
            fh.write(_dump_line(record))
            fh.write("\n")
    except OSError as exc:
        raise IoError(f"cannot append to {path}: {exc}") from exc
    return path


def read_ndjson(path) -> list[dict]:
    path = Path(path)
    if not path.exists():
        raise NotFound(str(path))
    records = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path} line {line_no}: {exc}") from exc
    return records


def write_json(path, document) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(document, fh, sort_keys=True, ensure_ascii=False, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return path


def read_json(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise NotFound(str(path))
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def save_corpus(corpus: Corpus, project_dir) -> Path:
    """Persist a corpus sorted by (source, external_id); byte-identical
    output for identical input."""
    root = ensure_layout(project_dir)
    ordered = sorted(corpus.issues, key=lambda i: (i.source, i.external_id))
    path = write_ndjson(root / "corpora" / f"{corpus.name}.ndjson",
                        [i.as_dict() for i in ordered])
    meta = {
        "name": corpus.name,
        "count": len(ordered),
        "created_at": corpus.created_at.isoformat() if corpus.created_at else None,
        "filter_provenance": corpus.filter_provenance,
    }
    write_json(root / "corpora" / f"{corpus.name}.meta.json", meta)
    return path


def load_corpus(project_dir, name: str) -> Corpus:
    root = Path(project_dir)
    data_path = root / "corpora" / f"{name}.ndjson"
    if not data_path.exists():
        raise NotFound(f"corpus {name!r} in {root}")
    records = read_ndjson(data_path)
    issues = tuple(IssueReport.from_dict(r) for r in records)
    meta_path = root / "corpora" / f"{name}.meta.json"
    created_at = None
    provenance: dict = {}
    if meta_path.exists():
        meta = read_json(meta_path)
        if meta.get("created_at"):
            created_at = parse_timestamp(meta["created_at"])
        provenance = meta.get("filter_provenance", {})
    return Corpus(name=name, issues=issues, filter_provenance=provenance,
                  created_at=created_at)


def list_corpora(project_dir) -> list[str]:
    corpora_dir = Path(project_dir) / "corpora"
    if not corpora_dir.exists():
        return []
    return sorted(p.stem for p in corpora_dir.glob("*.ndjson"))


def _pid_alive(pid: int) -> bool:
    try:
        os.kill(pid, 0)
    except ProcessLookupError:
        return False
    except PermissionError:
        return True
    return True


class ProjectLock:
    """Single-writer lock for a project directory.

    The lock file holds the owner's pid. A stale lock (holder no longer
    running) is reclaimed only when force is set.
    """

    def __init__(self, project_dir, force: bool = False):
        self.path = Path(project_dir) / LOCK_FILENAME
        self.force = force
        self._owned = False

    def acquire(self) -> "ProjectLock":
        self.path.parent.mkdir(parents=True, exist_ok=True)
        while True:
            try:
                fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
            except FileExistsError:
                holder = self._read_holder()
                if holder == os.getpid():
                    # this process already holds the lock; borrow it
                    return self
                if holder is not None and _pid_alive(holder):
                    raise LockHeld(holder)
                if not self.force:
                    raise LockHeld(holder, stale=True)
                try:
                    self.path.unlink()
                except FileNotFoundError:
                    pass
                continue
            with os.fdopen(fd, "w") as fh:
                fh.write(str(os.getpid()))
            self._owned = True
            return self

    def _read_holder(self) -> Optional[int]:
        try:
            return int(self.path.read_text().strip())
        except (OSError, ValueError):
            return None

    def release(self):
        if self._owned:
            try:
                self.path.unlink()
            except FileNotFoundError:
                pass
            self._owned = False

    def __enter__(self) -> "ProjectLock":
        return self.acquire()

    def __exit__(self, *exc):
        self.release()

    @property
    def held_by_other(self) -> bool:
        holder = self._read_holder()
        return holder is not None and holder != os.getpid() and _pid_alive(holder)


def save_gold(project_dir, name: str, entries: dict) -> Path:
    """Gold labels sorted by issue key; label lists sorted ascending."""
    root = ensure_layout(project_dir)
    records = [
        {"issue_key": key, "labels": sorted(entries[key], key=_label_sort_key)}
        for key in sorted(entries)
    ]
    return write_ndjson(root / "gold" / f"{name}.ndjson", records)


def _label_sort_key(label: str):
    tail = label[1:]
    return (0, int(tail)) if tail.isdigit() else (1, label)


def load_gold(project_dir, name: str) -> dict:
    path = Path(project_dir) / "gold" / f"{name}.ndjson"
    if not path.exists():
        raise NotFound(f"gold dataset {name!r} in {project_dir}")
    return {
        r["issue_key"]: frozenset(r.get("labels", ()))
        for r in read_ndjson(path)
    }
