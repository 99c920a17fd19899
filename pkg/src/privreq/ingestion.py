"""Issue ingestion: tracker connectors, record normalization, and the
component/status/information selection filters.
"""

import csv
import json
import os
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from importlib import resources
from typing import Iterator, Optional, Sequence

import requests

from .classifier import tokenize
from .errors import (
    AuthError,
    FormatError,
    MissingField,
    NetworkError,
    ValidationError,
)

DEFAULT_RETRY_ATTEMPTS = 3
DEFAULT_RETRY_BASE_DELAY = 0.5
DEFAULT_PAGE_SIZE = 100


@dataclass(frozen=True)
class IssueReport:
    source: str
    external_id: str
    title: str
    description: str
    components: frozenset
    status: str
    created_at: datetime
    resolved_at: Optional[datetime] = None
    comment_count: int = 0
    url: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "components",
                           frozenset(str(c).lower() for c in self.components))
        object.__setattr__(self, "status", str(self.status).lower())
        if self.resolved_at is not None and self.resolved_at < self.created_at:
            raise ValidationError("resolved_at < created_at",
                                  f"{self.source}:{self.external_id}")
        if self.comment_count < 0:
            raise ValidationError("comment_count negative",
                                  f"{self.source}:{self.external_id}")

    @property
    def key(self) -> str:
        return f"{self.source}:{self.external_id}"

    def as_dict(self) -> dict:
        return {
            "source": self.source,
            "external_id": self.external_id,
            "url": self.url,
            "title": self.title,
            "description": self.description,
            "components": sorted(self.components),
            "status": self.status,
            "created_at": self.created_at.isoformat(),
            "resolved_at": self.resolved_at.isoformat() if self.resolved_at else None,
            "comment_count": self.comment_count,
        }

    @classmethod
    def from_dict(cls, record: dict) -> "IssueReport":
        return cls(
            source=record["source"],
            external_id=record["external_id"],
            url=record.get("url"),
            title=record["title"],
            description=record.get("description", ""),
            components=frozenset(record.get("components", ())),
            status=record["status"],
            created_at=parse_timestamp(record["created_at"]),
            resolved_at=(parse_timestamp(record["resolved_at"])
                         if record.get("resolved_at") else None),
            comment_count=int(record.get("comment_count", 0)),
        )


@dataclass(frozen=True)
class FilterCriteria:
    required_component: str = "privacy"
    allowed_statuses: frozenset = frozenset({"assigned", "fixed", "verified"})
    min_description_tokens: int = 20

    def __post_init__(self):
        if not self.allowed_statuses:
            raise ValidationError("allowed_statuses empty")
        if self.min_description_tokens < 0:
            raise ValidationError("min_description_tokens negative")

    def as_dict(self) -> dict:
        return {
            "required_component": self.required_component,
            "allowed_statuses": sorted(self.allowed_statuses),
            "min_description_tokens": self.min_description_tokens,
        }

    @classmethod
    def from_dict(cls, record: dict) -> "FilterCriteria":
        return cls(
            required_component=record.get("required_component", "privacy"),
            allowed_statuses=frozenset(record.get("allowed_statuses",
                                                  ("assigned", "fixed", "verified"))),
            min_description_tokens=int(record.get("min_description_tokens", 20)),
        )


def parse_timestamp(value) -> datetime:
    """ISO 8601 strings (Z or numeric offsets) or epoch seconds, to UTC."""
    if isinstance(value, (int, float)):
        return datetime.fromtimestamp(value, tz=timezone.utc)
    text = str(value).strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    # offsets written without a colon, e.g. +0000
    if len(text) >= 5 and text[-5] in "+-" and text[-4:].isdigit():
        text = text[:-4] + text[-4:-2] + ":" + text[-2:]
    try:
        parsed = datetime.fromisoformat(text)
    except ValueError as exc:
        raise ValidationError("bad timestamp", f"{value!r}: {exc}") from exc
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return parsed.astimezone(timezone.utc)


_connector_config: Optional[dict] = None


def connector_config() -> dict:
    """Versioned field-mapping tables bundled with the package."""
    global _connector_config
    if _connector_config is None:
        text = resources.files("privreq.data").joinpath("connectors.json").read_text("utf-8")
        _connector_config = json.loads(text)
    return _connector_config


def _resolve_path(record, path: str):
    """Dot path into nested dicts; a part ending in [] maps over a list."""
    current = record
    parts = path.split(".")
    for i, part in enumerate(parts):
        if current is None:
            return None
        if part.endswith("[]"):
            name = part[:-2]
            seq = current.get(name) if isinstance(current, dict) else None
            if not isinstance(seq, list):
                return None
            rest = ".".join(parts[i + 1:])
            if not rest:
                return seq
            out = [_resolve_path(item, rest) for item in seq]
            return [v for v in out if v is not None]
        if not isinstance(current, dict):
            return None
        current = current.get(part)
    return current


def _first_value(record: dict, paths: Sequence[str]):
    for path in paths:
        value = _resolve_path(record, path)
        if value is not None and value != "":
            return value
    return None


def _as_components(value) -> frozenset:
    if value is None:
        return frozenset()
    if isinstance(value, str):
        parts = [p for chunk in value.split(";") for p in chunk.split(",")]
        return frozenset(p.strip().lower() for p in parts if p.strip())
    return frozenset(str(v).strip().lower() for v in value if str(v).strip())


def normalize_issue(raw: dict, source: str) -> IssueReport:
    """Map one raw tracker record to an IssueReport via the mapping tables."""
    cfg = connector_config()
    format_name = cfg["sources"].get(source, cfg["default_format"])
    mapping = cfg["formats"][format_name]

    external_id = _first_value(raw, mapping["external_id"])
    if external_id is None:
        raise MissingField("external_id")
    title = _first_value(raw, mapping["title"])
    if title is None:
        raise MissingField("title")
    status = _first_value(raw, mapping["status"])
    if status is None:
        raise MissingField("status")
    created_raw = _first_value(raw, mapping["created_at"])
    if created_raw is None:
        raise MissingField("created_at")

    resolved_raw = _first_value(raw, mapping["resolved_at"])
    comment_raw = _first_value(raw, mapping["comment_count"])
    description = _first_value(raw, mapping["description"]) or ""
    url = _first_value(raw, mapping["url"])

    return IssueReport(
        source=source,
        external_id=str(external_id),
        url=str(url) if url is not None else None,
        title=str(title),
        description=str(description),
        components=_as_components(_first_value(raw, mapping["components"])),
        status=str(status),
        created_at=parse_timestamp(created_raw),
        resolved_at=parse_timestamp(resolved_raw) if resolved_raw is not None else None,
        comment_count=int(comment_raw) if comment_raw is not None else 0,
    )


def filter_privacy_issues(issues: Sequence[IssueReport],
                          criteria: Optional[FilterCriteria] = None) -> list[IssueReport]:
    """Keep issues tagged with the required component in an allowed status."""
    c = criteria or FilterCriteria()
    return [
        i for i in issues
        if c.required_component in i.components and i.status in c.allowed_statuses
    ]


def filter_low_information(issues: Sequence[IssueReport], min_tokens: int = 20) -> list[IssueReport]:
    """Keep issues whose description has at least min_tokens content tokens."""
    return [i for i in issues if len(tokenize(i.description)) >= min_tokens]


def _request_page(url: str, params: dict, headers: dict,
                  attempts: int, base_delay: float) -> dict:
    last_error = None
    for attempt in range(attempts):
        try:
            response = requests.get(url, params=params, headers=headers, timeout=30)
        except requests.RequestException as exc:
            last_error = NetworkError(f"request to {url} failed: {exc}")
        else:
            if response.status_code in (401, 403):
                raise AuthError(f"{url} returned {response.status_code}")
            if response.status_code >= 500 or response.status_code == 429:
                last_error = NetworkError(f"{url} returned {response.status_code}")
            elif response.status_code != 200:
                raise NetworkError(f"{url} returned {response.status_code}")
            else:
                try:
                    return response.json()
                except ValueError as exc:
                    raise FormatError(f"{url} returned unparseable body: {exc}") from exc
        if attempt + 1 < attempts:
            time.sleep(base_delay * (2 ** attempt))
    raise last_error


def _auth_headers(source_config: dict) -> dict:
    env_name = source_config.get("auth_env")
    if not env_name:
        return {}
    token = os.environ.get(env_name)
    if not token:
        raise AuthError(f"environment variable {env_name} is not set")
    return {"Authorization": f"Bearer {token}"}


def _fetch_jira(source_config: dict) -> Iterator[dict]:
    endpoint = source_config["endpoint"]
    page_size = int(source_config.get("page_size", DEFAULT_PAGE_SIZE))
    headers = _auth_headers(source_config)
    attempts = int(source_config.get("retry_attempts", DEFAULT_RETRY_ATTEMPTS))
    delay = float(source_config.get("retry_base_delay", DEFAULT_RETRY_BASE_DELAY))
    base_params = dict(source_config.get("params", {}))
    start = 0
    while True:
        params = dict(base_params, startAt=start, maxResults=page_size)
        page = _request_page(endpoint, params, headers, attempts, delay)
        try:
            issues = page["issues"]
            total = int(page["total"])
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"jira page missing fields: {exc}") from exc
        yield from issues
        start += len(issues)
        if not issues or start >= total:
            return


def _fetch_monorail(source_config: dict) -> Iterator[dict]:
    endpoint = source_config["endpoint"]
    page_size = int(source_config.get("page_size", DEFAULT_PAGE_SIZE))
    headers = _auth_headers(source_config)
    attempts = int(source_config.get("retry_attempts", DEFAULT_RETRY_ATTEMPTS))
    delay = float(source_config.get("retry_base_delay", DEFAULT_RETRY_BASE_DELAY))
    base_params = dict(source_config.get("params", {}))
    start = 0
    while True:
        params = dict(base_params, start=start, num=page_size)
        page = _request_page(endpoint, params, headers, attempts, delay)
        try:
            items = page["items"]
            total = int(page["total"])
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"monorail page missing fields: {exc}") from exc
        yield from items
        start += len(items)
        if not items or start >= total:
            return


def _fetch_local(source_config: dict) -> Iterator[dict]:
    path = source_config["path"]
    try:
        if str(path).endswith(".csv"):
            with open(path, newline="", encoding="utf-8") as fh:
                yield from csv.DictReader(fh)
            return
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    yield json.loads(line)
                except json.JSONDecodeError as exc:
                    raise FormatError(f"{path} line {line_no}: {exc}") from exc
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc


_CONNECTORS = {
    "jira-rest": _fetch_jira,
    "monorail-rest": _fetch_monorail,
    "local-file": _fetch_local,
}


def fetch_issues(source_config: dict) -> Iterator[dict]:
    """Yield every raw record from the configured connector, following
    pagination to exhaustion with per-request retries."""
    connector = source_config.get("connector")
    if connector not in _CONNECTORS:
        raise FormatError(f"unknown connector {connector!r}")
    return _CONNECTORS[connector](source_config)
