"""HTTP surface for steering sessions.

POST /sessions                          create a session, start segment 1
GET  /sessions/{id}                     session summary
GET  /sessions/{id}/tree                navigation tree
GET  /sessions/{id}/nodes/{nid}         node view (progress while running)
POST /sessions/{id}/nodes/{nid}/choose  freeze a centroid, start next segment
GET  /sessions/{id}/nodes/{nid}/landscape  PCA points + KDE grid
GET  /healthz

Static console assets (when built) are served under /ui.
"""

from __future__ import annotations

import json
import os

from fastapi import Body, FastAPI, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .fixtures_io import fixture_text
from .model import ModelParseError, ModelValidationError, load_model
from .optimizer import ConfigError, SearchConfig
from .sessions import (
    NodeNotFound,
    NodeNotReady,
    SessionNotFound,
    SessionStore,
)

def default_data_dir() -> str:
    return os.environ.get("ARCHSTEER_DATA_DIR", os.path.join(".", "archsteer-data"))


def _config_from_payload(payload: dict):
    raw = dict(payload.get("config") or {})
    cluster_k = raw.pop("cluster_k", 4)
    cluster_scope = raw.pop("cluster_scope", "front")
    discretization = raw.pop("discretization", "equal-width")
    detectors = raw.pop("detectors", None)
    if detectors is not None:
        from .evaluation import DEFAULT_DETECTOR_THRESHOLDS

        unknown = set(detectors) - set(DEFAULT_DETECTOR_THRESHOLDS)
        if unknown:
            raise ConfigError(f"unknown detector keys: {', '.join(sorted(unknown))}")
    allowed = {
        "iterations",
        "chromosome_length",
        "interactions",
        "population_size",
        "p_crossover",
        "p_mutation",
        "seed",
        "independent_runs",
    }
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return SearchConfig(**raw), cluster_k, cluster_scope, detectors, discretization


def create_app(data_dir: str | None = None, workers: int = 2, ui_dir: str | None = None) -> FastAPI:
    store = SessionStore(data_dir or default_data_dir(), workers=workers)
    app = FastAPI(title="archsteer", version="0.1.0")
    app.state.store = store

    @app.exception_handler(SessionNotFound)
    @app.exception_handler(NodeNotFound)
    async def _not_found(request, exc):
        return JSONResponse(status_code=404, content={"error": str(exc)})

    @app.exception_handler(NodeNotReady)
    async def _conflict(request, exc):
        return JSONResponse(status_code=409, content={"error": str(exc)})

    @app.exception_handler(ConfigError)
    async def _unprocessable(request, exc):
        return JSONResponse(status_code=422, content={"error": str(exc)})

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/sessions", status_code=201)
    def create_session(payload: dict = Body(...)):
        if "model_fixture" in payload:
            model_text = fixture_text(payload["model_fixture"])
        elif "model" in payload:
            model_text = json.dumps(payload["model"])
        else:
            return JSONResponse(
                status_code=422,
                content={"error": "payload needs 'model' or 'model_fixture'"},
            )
        try:
            model = load_model(model_text)
        except ModelValidationError as exc:
            return JSONResponse(status_code=422, content={"error": "invalid model",
                                                          "violations": exc.violations})
        except ModelParseError as exc:
            return JSONResponse(status_code=422, content={"error": str(exc)})
        try:
            config, cluster_k, cluster_scope, detectors, discretization = (
                _config_from_payload(payload)
            )
            config.check()
        except (ConfigError, TypeError) as exc:
            return JSONResponse(status_code=422, content={"error": str(exc)})
        session = store.create_session(
            model, config, cluster_k, cluster_scope, detectors, discretization
        )
        return {"id": session.id}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return store.session_view(session_id)

    @app.get("/sessions/{session_id}/tree")
    def get_tree(session_id: str):
        return store.tree_view(session_id)

    @app.get("/sessions/{session_id}/nodes/{node_id}")
    def get_node(session_id: str, node_id: str, scope: str = "front"):
        return store.node_view(session_id, node_id, include_archive=scope == "archive")

    @app.post("/sessions/{session_id}/nodes/{node_id}/choose")
    def choose(session_id: str, node_id: str, payload: dict = Body(...),
               response: Response = None):
        if "cluster" not in payload:
            return JSONResponse(status_code=422, content={"error": "missing 'cluster'"})
        child_id, created = store.choose_centroid(session_id, node_id, int(payload["cluster"]))
        response.status_code = 202 if created else 200
        return {"child": child_id}

    @app.get("/sessions/{session_id}/nodes/{node_id}/landscape")
    def landscape(session_id: str, node_id: str):
        return store.landscape_view(session_id, node_id)

    resolved_ui = ui_dir or os.environ.get("ARCHSTEER_UI_DIR")
    if resolved_ui is None:
        candidate = os.path.join(os.getcwd(), "frontend", "dist")
        if os.path.isdir(candidate):
            resolved_ui = candidate
    if resolved_ui and os.path.isdir(resolved_ui):
        app.mount("/ui", StaticFiles(directory=resolved_ui, html=True), name="ui")

    return app
