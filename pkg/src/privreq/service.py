"""Local HTTP API over a project directory, plus the built UI bundle.

One long-running server per project holds the writer lock; a second
server on the same project comes up read-only, failing write endpoints
with 409 while reads keep working.
"""

import os
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import annotation, reporting
from .errors import (
    AuthError,
    BindError,
    EmptyCorpus,
    EmptyDocument,
    EmptyGold,
    FormatError,
    InsufficientCoders,
    InsufficientData,
    InvalidCombination,
    InvalidConfidence,
    InvalidPlan,
    LockHeld,
    MissingField,
    MissingGold,
    NoDisagreement,
    NotAssigned,
    NotFound,
    NoVariation,
    ParseError,
    PrivReqError,
    UnknownGoal,
    UnknownRequirement,
    UnresolvedDisagreements,
    ValidationError,
)
from .ingestion import parse_timestamp
from .store import ProjectLock, load_corpus, load_gold
from .taxonomy import Taxonomy, load_canonical, load_taxonomy

TOKEN_ENV = "PRIVREQ_API_TOKEN"

_STATUS_BY_ERROR = {
    # request shape / value problems
    ValidationError: 400,
    ParseError: 400,
    FormatError: 400,
    InvalidConfidence: 400,
    MissingField: 400,
    # missing resources
    NotFound: 404,
    MissingGold: 404,
    # writer conflicts
    LockHeld: 409,
    # domain rule violations
    NotAssigned: 422,
    UnknownRequirement: 422,
    UnknownGoal: 422,
    NoDisagreement: 422,
    InvalidCombination: 422,
    UnresolvedDisagreements: 422,
    EmptyCorpus: 422,
    EmptyGold: 422,
    EmptyDocument: 422,
    InvalidPlan: 422,
    InsufficientCoders: 422,
    InsufficientData: 422,
    NoVariation: 422,
    AuthError: 401,
}


def _status_for(exc: PrivReqError) -> int:
    for cls in type(exc).__mro__:
        if cls in _STATUS_BY_ERROR:
            return _STATUS_BY_ERROR[cls]
    return 422


def _taxonomy_payload(taxonomy: Taxonomy) -> dict:
    return {
        "version": taxonomy.version,
        "goals": [
            {
                "id": g.id,
                "name": g.name,
                "description": g.description,
                "expected_requirement_count": g.expected_requirement_count,
            }
            for g in taxonomy.goals
        ],
        "requirements": [
            {
                "id": r.id,
                "action_verb": r.action_verb,
                "object": r.object,
                "complement": r.complement,
                "text": r.text,
                "goal_id": r.goal_id,
                "sources": [{"regulation": s.regulation, "clause": s.clause}
                            for s in r.sources],
                "keywords": list(r.keywords),
                "merged_from": list(r.merged_from),
                "reconstructed": r.reconstructed,
            }
            for r in taxonomy.requirements
        ],
    }


def _parse_int(raw, name: str, default: int, minimum: int = 0) -> int:
    if raw is None:
        return default
    try:
        value = int(raw)
    except (TypeError, ValueError):
        raise ValidationError("bad query parameter", f"{name} must be an integer")
    if value < minimum:
        raise ValidationError("bad query parameter", f"{name} must be >= {minimum}")
    return value


def create_app(project_dir, taxonomy_path=None, read_only=None,
               token=None, ui_dir=None) -> FastAPI:
    project_dir = Path(project_dir)
    taxonomy = load_taxonomy(taxonomy_path) if taxonomy_path else load_canonical()
    if token is None:
        token = os.environ.get(TOKEN_ENV) or None
    if read_only is None:
        read_only = ProjectLock(project_dir).held_by_other

    app = FastAPI(title="privreq", docs_url=None, redoc_url=None)
    app.state.project_dir = project_dir
    app.state.taxonomy = taxonomy
    app.state.read_only = read_only
    app.state.token = token

    @app.exception_handler(PrivReqError)
    async def handle_domain_error(request: Request, exc: PrivReqError):
        return JSONResponse(
            status_code=_status_for(exc),
            content={"code": exc.code, "message": str(exc)},
        )

    @app.exception_handler(ValueError)
    async def handle_value_error(request: Request, exc: ValueError):
        return JSONResponse(
            status_code=400,
            content={"code": "bad_request", "message": str(exc)},
        )

    @app.middleware("http")
    async def check_token(request: Request, call_next):
        if app.state.token and request.url.path.startswith("/api"):
            expected = f"Bearer {app.state.token}"
            if request.headers.get("authorization") != expected:
                return JSONResponse(
                    status_code=401,
                    content={"code": "unauthorized",
                             "message": "missing or wrong bearer token"},
                )
        return await call_next(request)

    def guard_writes():
        if app.state.read_only:
            raise LockHeld()

    async def body_of(request: Request) -> dict:
        try:
            payload = await request.json()
        except Exception as exc:
            raise ValidationError("bad body", f"request body must be JSON: {exc}")
        if not isinstance(payload, dict):
            raise ValidationError("bad body", "request body must be a JSON object")
        return payload

    def session_of(session_id: str) -> annotation.Session:
        return annotation.load_session(project_dir, session_id)

    @app.get("/api/health")
    def health():
        return {"status": "ok", "read_only": app.state.read_only}

    @app.get("/api/taxonomy")
    def get_taxonomy():
        return _taxonomy_payload(app.state.taxonomy)

    @app.get("/api/corpora/{name}/issues")
    def corpus_issues(name: str, request: Request):
        offset = _parse_int(request.query_params.get("offset"), "offset", 0)
        limit = _parse_int(request.query_params.get("limit"), "limit", 50, minimum=1)
        corpus = load_corpus(project_dir, name)
        ordered = sorted(corpus.issues, key=lambda i: (i.source, i.external_id))
        window = ordered[offset:offset + limit]
        return {
            "name": name,
            "total": len(ordered),
            "offset": offset,
            "limit": limit,
            "issues": [i.as_dict() for i in window],
        }

    @app.get("/api/sessions")
    def sessions_index():
        return {"sessions": annotation.list_sessions(project_dir)}

    @app.post("/api/sessions", status_code=201)
    async def create_session(request: Request):
        guard_writes()
        payload = await body_of(request)
        for field in ("corpus", "coders", "plan"):
            if field not in payload:
                raise ValidationError("missing field", field)
        corpus = load_corpus(project_dir, payload["corpus"])
        session = annotation.create_session(
            project_dir, corpus, payload["coders"], payload["plan"],
            session_id=payload.get("session_id"),
        )
        return session.as_dict()

    def ordered_labels(labels) -> list:
        return sorted(labels, key=lambda rid: (len(rid), rid))

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str):
        session = session_of(session_id)
        state = annotation.load_annotations(project_dir, session_id)
        labels = {
            issue_key: {coder: ordered_labels(labels)
                        for coder, labels in sorted(per_coder.items())}
            for issue_key, per_coder in sorted(state.items())
        }
        return {**session.as_dict(), "labels": labels}

    @app.post("/api/sessions/{session_id}/labels", status_code=201)
    async def post_label(session_id: str, request: Request):
        guard_writes()
        payload = await body_of(request)
        for field in ("coder_id", "issue_key", "labels"):
            if field not in payload:
                raise ValidationError("missing field", field)
        session = session_of(session_id)
        annotated_at = (parse_timestamp(payload["annotated_at"])
                        if payload.get("annotated_at") else None)
        record = annotation.record_label(
            project_dir, session, payload["coder_id"], payload["issue_key"],
            payload["labels"], app.state.taxonomy,
            annotated_at=annotated_at, note=payload.get("note"),
        )
        return record.as_dict()

    @app.get("/api/sessions/{session_id}/disagreements")
    def get_disagreements(session_id: str):
        session = session_of(session_id)
        items = annotation.detect_disagreements(project_dir, session)
        return {"disagreements": [d.as_dict() for d in items]}

    @app.post("/api/sessions/{session_id}/resolutions", status_code=201)
    async def post_resolution(session_id: str, request: Request):
        guard_writes()
        payload = await body_of(request)
        for field in ("issue_key", "method"):
            if field not in payload:
                raise ValidationError("missing field", field)
        session = session_of(session_id)
        resolution = annotation.record_resolution(
            project_dir, session, payload["issue_key"], payload["method"],
            final_labels=payload.get("final_labels"),
            notes=payload.get("notes", ""),
            taxonomy=app.state.taxonomy,
        )
        return resolution.as_dict()

    @app.get("/api/sessions/{session_id}/irr")
    def get_irr(session_id: str, request: Request):
        metric = request.query_params.get("metric", "alpha")
        distance = request.query_params.get("distance", "masi")
        session = session_of(session_id)
        result = annotation.session_irr(project_dir, session,
                                        metric=metric, distance=distance)
        return result.as_dict()

    @app.post("/api/sessions/{session_id}/gold", status_code=201)
    async def post_gold(session_id: str, request: Request):
        guard_writes()
        payload = await body_of(request)
        if "name" not in payload:
            raise ValidationError("missing field", "name")
        session = session_of(session_id)
        gold = annotation.export_gold(project_dir, session, payload["name"])
        return {
            "name": gold.name,
            "entries": {k: ordered_labels(v)
                        for k, v in sorted(gold.entries.items())},
        }

    @app.get("/api/gold/{name}/coverage")
    def gold_coverage(name: str):
        gold = load_gold(project_dir, name)
        rows = reporting.coverage_by_goal(gold, app.state.taxonomy)
        return {"gold": name, "rows": [r.as_dict() for r in rows]}

    @app.get("/api/gold/{name}/top")
    def gold_top(name: str, request: Request):
        n = _parse_int(request.query_params.get("n"), "n", 10, minimum=1)
        gold = load_gold(project_dir, name)
        ranked = reporting.top_requirements(gold, n)
        return {
            "gold": name,
            "top": [{"requirement_id": rid, "occurrence_count": count}
                    for rid, count in ranked],
        }

    if ui_dir is None:
        ui_dir = Path(__file__).resolve().parent / "ui" / "dist"
    ui_dir = Path(ui_dir)
    if ui_dir.is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def serve(project_dir, bind_address: str = "127.0.0.1", port: int = 8571,
          taxonomy_path=None, ui_dir=None) -> int:
    """Run the API server; holds the writer lock for the process lifetime.

    A second server on a locked project starts read-only instead of
    failing outright.
    """
    import signal

    import uvicorn

    lock = ProjectLock(project_dir)
    read_only = False
    try:
        lock.acquire()
    except LockHeld as exc:
        if exc.stale:
            raise
        read_only = True
    app = create_app(project_dir, taxonomy_path=taxonomy_path,
                     read_only=read_only, ui_dir=ui_dir)

    # The server framework re-raises a captured shutdown signal with the
    # pre-serve handler restored; that handler must release the lock or
    # the default action kills the process with the lock file left behind.
    def release_then_exit(signum, frame):
        lock.release()
        signal.signal(signum, signal.SIG_DFL)
        signal.raise_signal(signum)

    previous = {}
    for sig in (signal.SIGINT, signal.SIGTERM):
        previous[sig] = signal.signal(sig, release_then_exit)
    try:
        uvicorn.run(app, host=bind_address, port=port, log_level="warning")
    except (OSError, SystemExit) as exc:
        detail = exc if isinstance(exc, OSError) else "server failed to start"
        raise BindError(f"cannot bind {bind_address}:{port}: {detail}") from exc
    finally:
        lock.release()
        for sig, handler in previous.items():
            signal.signal(sig, handler)
    return 0
