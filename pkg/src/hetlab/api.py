"""Versioned HTTP/JSON service: the only channel between computation and UI.

GET endpoints are side-effect-free and cacheable; analyze responses are
cached per (round, source, k, alpha) and replayed byte-identically.  Training
runs execute on a single background worker, one at a time; the UI polls
``/v1/runs/{id}/status``.
"""

from __future__ import annotations

import json
import queue
import threading
from pathlib import Path

from fastapi import FastAPI, Query, Request, Response, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import workflow
from .errors import HetlabError, InputError, NotFoundError
from .scenario import run_scenario
from .session import SessionStore, set_combine
from .storage import DataStore, canonical_json
from .workflow import AnalysisContext

STATUS_BY_CODE = {
    "bad-input": 400,
    "not-found": 404,
    "unsupported-architecture": 422,
    "numeric": 500,
    "internal": 500,
}


def error_response(exc: HetlabError) -> Response:
    status = STATUS_BY_CODE.get(exc.code, 500)
    body = {"status": status, "code": exc.code, "message": str(exc)}
    return Response(content=canonical_json(body), status_code=status,
                    media_type="application/json")


class RunRequest(BaseModel):
    name: str = "run"
    seed: int = 0
    rounds: int
    model: dict
    clients: list[dict]
    analyzed_client: str | None = None
    standalone_epochs: int | None = None
    injections: list[dict] = []


class AnnotationRequest(BaseModel):
    record_ids: list[int]
    note: str = ""
    round: int
    source_cluster: int | None = None


class AnalyzeRequest(BaseModel):
    model_config = {"populate_by_name": True}

    input_source: str = Field("local", alias="input-source")
    k: int | None = None
    alpha: float | None = None
    grid: int | None = None


class CombineRequest(BaseModel):
    annotation_ids: list[int] = []
    cluster: int | None = None
    mode: str


class AppState:
    def __init__(self, data_dir, default_seed: int = 0):
        self.store = DataStore(data_dir)
        self.session = SessionStore(data_dir)
        self.default_seed = default_seed
        self.analyze_cache: dict[tuple, tuple[bytes, AnalysisContext]] = {}
        self.current: AnalysisContext | None = None
        self.queue: "queue.Queue[dict]" = queue.Queue()
        self.worker = threading.Thread(target=self._work, daemon=True)
        self.worker.start()

    def _work(self):
        while True:
            job = self.queue.get()
            run_id = job["run_id"]
            try:
                self.store.set_status(run_id, {"state": "running", "round": 0,
                                               "rounds": job["scenario"]["rounds"]})
                record = run_scenario(job["scenario"], store=self.store)
                record.run_id = run_id
                self.store.save_run(record)
            except Exception as exc:  # status carries the failure; API stays up
                self.store.set_status(run_id, {"state": "failed", "error": str(exc)})
            finally:
                self.queue.task_done()

    def submit_run(self, scenario: dict) -> str:
        from .storage import scenario_run_id
        run_id = scenario_run_id(scenario)
        try:
            self.store.get_status(run_id)
        except NotFoundError:
            self.store.set_status(run_id, {"state": "queued", "round": 0,
                                           "rounds": scenario["rounds"]})
            self.queue.put({"run_id": run_id, "scenario": scenario})
        return run_id

    def analyze(self, run_id: str, round_index: int, source: str,
                k: int | None, alpha: float | None, grid: int | None) -> bytes:
        key = (run_id, round_index, source, k, alpha, grid)
        if key not in self.analyze_cache:
            run = self.store.load_run(run_id)
            payload, ctx = workflow.analyze_round(
                run, round_index, source=source, k=k, alpha=alpha,
                **({"grid": grid} if grid else {}))
            self.analyze_cache[key] = (canonical_json(payload).encode("utf-8"), ctx)
        body, ctx = self.analyze_cache[key]
        self.current = ctx
        state = self.session.load_state()
        state.run_id = run_id
        state.selected_round = round_index
        state.source = source
        state.cluster_count = ctx.k
        state.alpha = ctx.alpha
        self.session.save_state(state)
        return body

    def require_current(self) -> AnalysisContext:
        if self.current is None:
            raise NotFoundError("no analysis yet; POST an analyze request first")
        return self.current


def json_response(payload, status_code: int = 200) -> Response:
    return Response(content=canonical_json(payload), status_code=status_code,
                    media_type="application/json")


def create_app(data_dir, default_seed: int = 0, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="hetlab", version="1")
    state = AppState(data_dir, default_seed)
    app.state.hetlab = state

    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])

    @app.exception_handler(HetlabError)
    async def _hetlab_error(_request: Request, exc: HetlabError):
        return error_response(exc)

    # --- ingestion and runs ------------------------------------------------

    @app.post("/v1/datasets")
    async def upload_dataset(csv: UploadFile, manifest: UploadFile):
        csv_text = (await csv.read()).decode("utf-8")
        try:
            manifest_obj = json.loads((await manifest.read()).decode("utf-8"))
        except json.JSONDecodeError as exc:
            raise InputError(f"manifest is not valid JSON: {exc.msg}") from exc
        dataset_id = state.store.add_dataset(csv_text, manifest_obj)
        return json_response({"id": dataset_id})

    @app.get("/v1/datasets")
    async def list_datasets():
        return json_response({"datasets": state.store.list_datasets()})

    @app.post("/v1/runs")
    async def create_run(request: RunRequest):
        if not request.clients:
            raise InputError("a run needs at least one client")
        scenario = {
            "name": request.name,
            "seed": request.seed if request.seed else state.default_seed,
            "rounds": request.rounds,
            "model": request.model,
            "clients": request.clients,
            "analyzed_client": request.analyzed_client
                or str(request.clients[0].get("id", "client-0")),
            "injections": request.injections,
            "standalone_epochs": request.standalone_epochs,
        }
        return json_response({"id": state.submit_run(scenario)})

    @app.get("/v1/runs")
    async def list_runs():
        return json_response({"runs": state.store.list_runs()})

    @app.get("/v1/runs/{run_id}/status")
    async def run_status(run_id: str):
        return json_response(state.store.get_status(run_id))

    @app.get("/v1/runs/{run_id}/metrics")
    async def run_metrics(run_id: str):
        return json_response(workflow.metrics_view(state.store.load_run(run_id)))

    @app.get("/v1/runs/{run_id}/param-projection")
    async def run_projection(run_id: str, layer: str = "all",
                             start: int | None = Query(None, alias="from"),
                             to: int | None = None):
        run = state.store.load_run(run_id)
        return json_response(workflow.param_projection_view(run, start, to, layer=layer))

    @app.post("/v1/runs/{run_id}/rounds/{round_index}/analyze")
    async def analyze(run_id: str, round_index: int, request: AnalyzeRequest):
        body = state.analyze(run_id, round_index, request.input_source,
                             request.k, request.alpha, request.grid)
        return Response(content=body, media_type="application/json")

    # --- analysis views ----------------------------------------------------

    @app.get("/v1/analysis/cluster/{cluster_id}/dimensions")
    async def cluster_dimensions(cluster_id: int, entrance: str = "ccpca",
                                 channel: int | None = None, layer: str | None = None):
        ctx = state.require_current()
        return json_response(workflow.dimensions_view(ctx, cluster_id, entrance=entrance,
                                                      channel=channel, layer=layer))

    @app.get("/v1/analysis/label-matrix")
    async def analysis_label_matrix(grid: int = 16, cluster: int | None = None):
        ctx = state.require_current()
        return json_response(workflow.label_matrix_view(ctx, grid=grid, cluster_id=cluster))

    @app.get("/v1/analysis/dimension/{dim}/distribution")
    async def analysis_distribution(dim: int, bins: int = 20, scale: str = "linear",
                                    cluster: int | None = None):
        ctx = state.require_current()
        return json_response(workflow.dimension_distribution_view(
            ctx, dim, bins=bins, scale=scale, cluster_id=cluster))

    @app.get("/v1/analysis/record/{record_id}")
    async def analysis_record(record_id: int):
        ctx = state.require_current()
        return json_response(workflow.record_view(ctx, record_id))

    @app.post("/v1/analysis/set-combine")
    async def analysis_set_combine(request: CombineRequest):
        operands: list[list[int]] = []
        for aid in request.annotation_ids:
            operands.append(state.session.get_annotation(aid).record_ids)
        if request.cluster is not None:
            ctx = state.require_current()
            operands.append(ctx.cluster(request.cluster).members)
        combined = set_combine(operands, request.mode)
        return json_response({"mode": request.mode, "record_ids": combined,
                              "count": len(combined)})

    # --- annotations ---------------------------------------------------------

    @app.post("/v1/annotations")
    async def create_annotation(request: AnnotationRequest):
        session_state = state.session.load_state()
        size = None
        if session_state.run_id:
            size = state.store.load_run(session_state.run_id).dataset.n
        ann = state.session.annotate(request.record_ids, request.note, request.round,
                                     request.source_cluster, dataset_size=size)
        return json_response(ann.to_json(), status_code=201)

    @app.get("/v1/annotations")
    async def list_annotations():
        return json_response({"annotations": [a.to_json()
                                              for a in state.session.list_annotations()]})

    @app.delete("/v1/annotations/{annotation_id}")
    async def delete_annotation(annotation_id: int):
        state.session.delete_annotation(annotation_id)
        return json_response({"deleted": annotation_id})

    @app.get("/v1/annotations/{annotation_id}/track")
    async def track_annotation(annotation_id: int, round: int):
        ann = state.session.get_annotation(annotation_id)
        session_state = state.session.load_state()
        if not session_state.run_id:
            raise NotFoundError("no active run in the session")
        run = state.store.load_run(session_state.run_id)
        return json_response(workflow.track_view(run, ann, round))

    if ui_dir and Path(ui_dir).exists():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
