"""The HTTP surface, organized in four layers.

    Data          /data/**        entity CRUD (trade) and raw quantities (indices)
    Technique     /technique/**   forecast models
    Action        /action/**      graded indicators, /lifecycle/** process actions
    Presentation  /feed/**        event stream and meta endpoints for the UI

The indices endpoints answer "where do we stand" with raw quantities only;
the model endpoints compute a chosen forecast; the indicator endpoints
assemble the graded report the decision maker acts on.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from enum import Enum
from typing import Optional

from fastapi import FastAPI, Header, Query, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse
from starlette.concurrency import run_in_threadpool

from .config import ServiceConfig
from .errors import (
    MethodNotAllowed,
    PmControlsError,
    Unauthorized,
    ValidationFailed,
)
from .evm import Baseline, EacVariant, ProgressSnapshot
from .lifecycle import LifecycleEvent
from .money import TimePoint, format_money, parse_money
from .reports import (
    indicator_payload,
    indices_payload,
    lifecycle_payload,
    model_payload,
    project_summary,
    require_baseline,
)
from .storage import ProjectStore, canonical_json

FEED_POLL_SECONDS = 0.25
FEED_KEEPALIVE_SECONDS = 15.0

STATUS_BY_CODE = {
    "validation_failed": 400,
    "unknown_task": 400,
    "missing_estimate": 400,
    "undefined_index": 422,
    "no_defined_index": 422,
    "phase_violation": 409,
    "conflicting_revision": 409,
    "illegal_transition": 409,
    "terminal_state": 409,
    "already_exists": 409,
    "unauthorized": 403,
    "unknown_project": 404,
    "no_baseline": 404,
    "no_snapshot": 404,
    "method_not_allowed": 405,
    "config_invalid": 500,
}


class Layer(str, Enum):
    DATA = "data"
    TECHNIQUE = "technique"
    ACTION = "action"
    PRESENTATION = "presentation"


class Sublayer(str, Enum):
    TRADE = "trade"
    INDICES = "indices"
    FUNCTION = "function"
    MODELS = "models"
    APPLICATIVE = "applicative"
    INDICATORS = "indicators"
    INTERFACE = "interface"


@dataclass(frozen=True)
class LayeredRoute:
    layer: Layer
    sublayer: Sublayer
    method: str
    path: str


def canonical_response(doc, status_code: int = 200) -> Response:
    """Serialize ourselves so money strings stay exact and stable."""
    return Response(
        content=canonical_json(doc) + "\n",
        status_code=status_code,
        media_type="application/json",
    )


async def _json_body(request: Request):
    try:
        return await request.json()
    except Exception:
        raise ValidationFailed("request body must be valid JSON")


def _parse_expected_revision(raw: Optional[str]) -> Optional[int]:
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise ValidationFailed("expected_revision must be an integer", pointer="expected_revision")


def create_app(config: ServiceConfig, store: Optional[ProjectStore] = None) -> FastAPI:
    store = store if store is not None else ProjectStore(config.data_dir)
    app = FastAPI(title="pmcontrols", version="0.1.0", docs_url=None, redoc_url=None)
    app.state.store = store
    app.state.config = config
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    routes: list[LayeredRoute] = []

    def tag(layer: Layer, sublayer: Sublayer, method: str, path: str):
        routes.append(LayeredRoute(layer=layer, sublayer=sublayer, method=method, path=path))

    @app.exception_handler(PmControlsError)
    async def _domain_error(request: Request, exc: PmControlsError):
        status = STATUS_BY_CODE.get(exc.code, 500)
        return JSONResponse(
            status_code=status, content={"error": exc.code, "detail": exc.message}
        )

    # ── Data layer / trade (entity CRUD) ─────────────────────────────

    tag(Layer.DATA, Sublayer.TRADE, "POST", "/data/projects")

    @app.post("/data/projects")
    async def create_project(request: Request):
        body = await _json_body(request)
        if not isinstance(body, dict):
            raise ValidationFailed("request body must be an object")
        stored = store.create_project(body.get("project_id"))
        return canonical_response(project_summary(stored), status_code=201)

    tag(Layer.DATA, Sublayer.TRADE, "GET", "/data/projects")

    @app.get("/data/projects")
    async def list_projects():
        return canonical_response(
            {"projects": [project_summary(store.get(pid)) for pid in store.list_ids()]}
        )

    tag(Layer.DATA, Sublayer.TRADE, "GET", "/data/projects/{project_id}")

    @app.get("/data/projects/{project_id}")
    async def read_project(project_id: str):
        return canonical_response(store.get(project_id).to_doc())

    tag(Layer.DATA, Sublayer.TRADE, "DELETE", "/data/projects/{project_id}")

    @app.delete("/data/projects/{project_id}")
    async def delete_project(project_id: str):
        store.delete_project(project_id)
        return Response(status_code=204)

    tag(Layer.DATA, Sublayer.TRADE, "PUT", "/data/projects/{project_id}/baseline")

    @app.put("/data/projects/{project_id}/baseline")
    async def put_baseline(
        project_id: str,
        request: Request,
        rebaseline: bool = Query(default=False),
        expected_revision: Optional[str] = Query(default=None),
    ):
        body = await _json_body(request)
        baseline = Baseline.from_doc(body)
        if baseline.project_id != project_id:
            raise ValidationFailed(
                f"document project_id {baseline.project_id!r} does not match the URL",
                pointer="project_id",
            )
        stored, _ = store.set_baseline(
            project_id,
            baseline,
            rebaseline=rebaseline,
            expected_revision=_parse_expected_revision(expected_revision),
        )
        return canonical_response(
            {
                "project_id": project_id,
                "revision": stored.revision,
                "bac": format_money(baseline.bac),
                "task_count": len(baseline.tasks),
            }
        )

    tag(Layer.DATA, Sublayer.TRADE, "GET", "/data/projects/{project_id}/baseline")

    @app.get("/data/projects/{project_id}/baseline")
    async def read_baseline(project_id: str):
        record = store.get(project_id).record
        baseline = require_baseline(record)
        doc = baseline.to_doc()
        doc["bac"] = format_money(baseline.bac)
        return canonical_response(doc)

    tag(Layer.DATA, Sublayer.TRADE, "POST", "/data/projects/{project_id}/snapshots")

    @app.post("/data/projects/{project_id}/snapshots")
    async def post_snapshot(
        project_id: str,
        request: Request,
        expected_revision: Optional[str] = Query(default=None),
    ):
        body = await _json_body(request)
        snapshot = ProgressSnapshot.from_doc(body)
        if snapshot.project_id != project_id:
            raise ValidationFailed(
                f"document project_id {snapshot.project_id!r} does not match the URL",
                pointer="project_id",
            )
        stored, _, warnings = store.record_snapshot(
            project_id, snapshot, expected_revision=_parse_expected_revision(expected_revision)
        )
        return canonical_response(
            {
                "project_id": project_id,
                "revision": stored.revision,
                "status_date": snapshot.status_date.canonical(),
                "warnings": warnings,
            },
            status_code=201,
        )

    tag(Layer.DATA, Sublayer.TRADE, "GET", "/data/projects/{project_id}/snapshots")

    @app.get("/data/projects/{project_id}/snapshots")
    async def list_snapshots(project_id: str):
        record = store.get(project_id).record
        return canonical_response({"snapshots": [s.to_doc() for s in record.snapshots]})

    # Snapshots are immutable once recorded.
    tag(Layer.DATA, Sublayer.TRADE, "DELETE", "/data/projects/{project_id}/snapshots/{which}")

    @app.delete("/data/projects/{project_id}/snapshots/{which}")
    async def delete_snapshot(project_id: str, which: str):
        store.get(project_id)
        raise MethodNotAllowed("snapshots are immutable once recorded")

    tag(Layer.DATA, Sublayer.TRADE, "PUT", "/data/projects/{project_id}/snapshots/{which}")

    @app.put("/data/projects/{project_id}/snapshots/{which}")
    async def update_snapshot(project_id: str, which: str):
        store.get(project_id)
        raise MethodNotAllowed("snapshots are immutable once recorded")

    # ── Data layer / indices (raw quantities) ────────────────────────

    tag(Layer.DATA, Sublayer.INDICES, "GET", "/data/indices/{project_id}")

    @app.get("/data/indices/{project_id}")
    async def read_indices(project_id: str, status_date: Optional[str] = Query(default=None)):
        stored = store.get(project_id)
        point = TimePoint.parse(status_date, field="status_date") if status_date else None
        return canonical_response(indices_payload(stored, point))

    # ── Technique layer / models (forecasts) ─────────────────────────

    tag(Layer.TECHNIQUE, Sublayer.MODELS, "GET", "/technique/models/{project_id}")

    @app.get("/technique/models/{project_id}")
    async def read_model(
        project_id: str,
        variant: str = Query(...),
        new_etc: Optional[str] = Query(default=None),
    ):
        stored = store.get(project_id)
        try:
            chosen = EacVariant(variant)
        except ValueError:
            raise ValidationFailed(
                f"unknown variant {variant!r} "
                f"(one of: {', '.join(v.value for v in EacVariant)})",
                pointer="variant",
            )
        etc_value: Optional[Decimal] = None
        if new_etc is not None:
            etc_value = parse_money(new_etc, field="new_etc")
        return canonical_response(model_payload(stored, chosen, etc_value))

    # ── Action layer / indicators (graded report) ────────────────────

    tag(Layer.ACTION, Sublayer.INDICATORS, "GET", "/action/indicators/{project_id}")

    @app.get("/action/indicators/{project_id}")
    async def read_indicators(project_id: str):
        stored = store.get(project_id)
        return canonical_response(
            indicator_payload(stored, thresholds=config.thresholds, actions=config.actions)
        )

    # ── Action layer / applicative (lifecycle process) ───────────────

    tag(Layer.ACTION, Sublayer.APPLICATIVE, "GET", "/lifecycle/{project_id}")

    @app.get("/lifecycle/{project_id}")
    async def read_lifecycle(project_id: str):
        return canonical_response(lifecycle_payload(store.get(project_id), role_map=config.role_map))

    tag(Layer.ACTION, Sublayer.APPLICATIVE, "POST", "/lifecycle/{project_id}/events")

    @app.post("/lifecycle/{project_id}/events")
    async def post_event(
        project_id: str,
        request: Request,
        x_role: Optional[str] = Header(default=None),
        expected_revision: Optional[str] = Query(default=None),
    ):
        if not x_role:
            raise Unauthorized("the X-Role header is required for lifecycle events")
        body = await _json_body(request)
        event = LifecycleEvent.from_doc(body, default_role=x_role)
        if event.role != x_role:
            raise ValidationFailed(
                "event role does not match the X-Role header", pointer="role"
            )
        permitted = config.roles_for(event.kind)
        if x_role not in permitted:
            raise Unauthorized(
                f"role {x_role!r} may not submit {event.kind.value!r} "
                f"(permitted: {', '.join(sorted(permitted)) or 'none'})"
            )
        stored, _ = store.apply_event(
            project_id, event, expected_revision=_parse_expected_revision(expected_revision)
        )
        return canonical_response(lifecycle_payload(stored, role_map=config.role_map))

    # ── Presentation layer / feed ────────────────────────────────────

    tag(Layer.PRESENTATION, Sublayer.INTERFACE, "GET", "/feed/{project_id}")

    @app.get("/feed/{project_id}")
    async def feed_stream(
        project_id: str,
        request: Request,
        from_seq: int = Query(default=0, alias="from", ge=0),
        last_event_id: Optional[str] = Header(default=None),
    ):
        store.get(project_id)  # fail fast on unknown projects
        cursor = from_seq
        if last_event_id:
            try:
                cursor = max(cursor, int(last_event_id))
            except ValueError:
                raise ValidationFailed("Last-Event-ID must be an integer")

        async def stream(cursor: int):
            idle = 0.0
            # Replay committed history first, then follow live commits.
            while True:
                events = await run_in_threadpool(
                    store.wait_for_events, project_id, cursor, FEED_POLL_SECONDS
                )
                if await request.is_disconnected():
                    return
                if not events:
                    idle += FEED_POLL_SECONDS
                    if idle >= FEED_KEEPALIVE_SECONDS:
                        idle = 0.0
                        yield ": keepalive\n\n"
                    continue
                idle = 0.0
                for event in events:
                    cursor = event.seq
                    yield (
                        f"id: {event.seq}\n"
                        f"event: {event.kind.value}\n"
                        f"data: {canonical_json(event.to_doc())}\n\n"
                    )

        return StreamingResponse(stream(cursor), media_type="text/event-stream")

    tag(Layer.PRESENTATION, Sublayer.INTERFACE, "GET", "/feed/{project_id}/events")

    @app.get("/feed/{project_id}/events")
    async def feed_poll(project_id: str, from_seq: int = Query(default=0, alias="from", ge=0)):
        events = store.events_since(project_id, from_seq)
        return canonical_response({"events": [event.to_doc() for event in events]})

    # ── Presentation layer / meta ────────────────────────────────────

    tag(Layer.PRESENTATION, Sublayer.INTERFACE, "GET", "/health")

    @app.get("/health")
    async def health():
        return canonical_response({"status": "ok"})

    tag(Layer.PRESENTATION, Sublayer.INTERFACE, "GET", "/routes")

    @app.get("/routes")
    async def list_routes():
        return canonical_response(
            {
                "routes": [
                    {
                        "method": r.method,
                        "path": r.path,
                        "layer": r.layer.value,
                        "sublayer": r.sublayer.value,
                    }
                    for r in routes
                ]
            }
        )

    app.state.layered_routes = tuple(routes)
    return app
