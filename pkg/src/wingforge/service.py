"""HTTP service exposing mesh generation, surrogate prediction, Pareto
queries, and asynchronous optimization jobs.

JSON-only API.  /api/mesh and /api/predict are stateless; optimization
jobs run on a single background worker and are polled by id.
"""

from __future__ import annotations

import hashlib
import queue
import threading
import uuid
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import datastore, metrics, optimize
from .aero import Atmosphere, InflowConditions, surface_coefficients
from .doe import ParameterSpace
from .geometry import GeometryError, MeshResolution, WingDesign, loft_wing
from .metrics import PolarPoint
from .surrogate import BuiltinLiftLine, RemoteSurrogate, SurrogateError, SurrogateRef


@dataclass
class ServiceSettings:
    space: ParameterSpace = dc_field(default_factory=ParameterSpace)
    atmosphere: Atmosphere = dc_field(default_factory=Atmosphere)
    default_resolution: MeshResolution = MeshResolution(48, 24)
    datasets: dict = dc_field(default_factory=dict)  # name -> root path
    remote_endpoint: Optional[str] = None
    max_queued_jobs: int = 8


class DesignModel(BaseModel):
    c_r: float = Field(description="root chord [m]")
    b: float = Field(description="span [m]")
    taper: float = Field(description="tip chord / root chord")
    sweep_deg: float = Field(description="leading-edge sweep [deg]")


class InflowModel(BaseModel):
    U_inf: float = Field(description="freestream speed [m/s]")
    alpha_deg: float = Field(description="angle of attack [deg]")


class ResolutionModel(BaseModel):
    n_chord: int = 48
    n_span: int = 24


class MeshRequest(BaseModel):
    design: DesignModel
    resolution: Optional[ResolutionModel] = None
    allow_out_of_range: bool = False


class MeshResponse(BaseModel):
    vertices: list[float]
    triangles: list[int]
    n_vertices: int
    n_triangles: int
    metadata: dict
    out_of_range: bool


class PredictRequest(BaseModel):
    design: DesignModel
    inflow: InflowModel
    backend: str = "builtin-liftline"
    fields: bool = False
    allow_out_of_range: bool = True


class PredictResponse(BaseModel):
    C_D: float
    C_l: float
    lift_to_drag: float
    mach: float
    reynolds: float
    out_of_range: bool
    backend_version: str
    C_p: Optional[list[float]] = None
    C_f: Optional[list[float]] = None


class OptimizeRequest(BaseModel):
    method: str = "gradient"
    budget: int = 200
    seed: int = 0
    backend: str = "builtin-liftline"
    idempotency_key: Optional[str] = None


class JobModel(BaseModel):
    id: str
    status: str  # queued | running | done | failed
    progress: float
    evaluations: int
    budget: int
    result: Optional[dict] = None
    error: Optional[str] = None


class _Job:
    def __init__(self, job_id, request: OptimizeRequest, objective):
        self.id = job_id
        self.request = request
        self.objective = objective
        self.status = "queued"
        self.result = None
        self.error = None

    def to_model(self):
        return JobModel(
            id=self.id, status=self.status,
            evaluations=self.objective.evaluations,
            budget=self.request.budget,
            progress=min(1.0, self.objective.evaluations / self.request.budget),
            result=self.result, error=self.error,
        )


def _http_error(status, detail, field_name=None):
    body = {"error": True, "detail": detail}
    if field_name:
        body["field"] = field_name
    return HTTPException(status_code=status, detail=body)


def create_app(settings: Optional[ServiceSettings] = None) -> FastAPI:
    settings = settings or ServiceSettings()
    app = FastAPI(title="wingforge", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.settings = settings

    jobs: dict[str, _Job] = {}
    idempotency: dict[str, str] = {}
    jobs_lock = threading.Lock()
    job_queue: queue.Queue = queue.Queue()

    def worker():
        while True:
            job = job_queue.get()
            if job is None:
                return
            with jobs_lock:
                job.status = "running"
            try:
                config = optimize.OptimizerConfig(
                    method=job.request.method, budget=job.request.budget,
                    seed=job.request.seed)
                if job.request.method == "gradient":
                    res = optimize.optimize_gradient(job.objective, config)
                elif job.request.method == "evolutionary":
                    res = optimize.optimize_cmaes(job.objective, config)
                else:
                    res = optimize.optimize_bayes(job.objective, config)
                with jobs_lock:
                    job.result = res.to_dict()
                    job.status = "done"
            except Exception as exc:
                with jobs_lock:
                    job.error = str(exc)
                    job.status = "failed"

    threading.Thread(target=worker, daemon=True).start()

    def make_backend(name):
        if name == "builtin-liftline":
            return BuiltinLiftLine(field_resolution=settings.default_resolution)
        if name == "remote":
            if not settings.remote_endpoint:
                raise _http_error(400, "no remote endpoint configured", "backend")
            return RemoteSurrogate(SurrogateRef(
                kind="remote", endpoint=settings.remote_endpoint))
        raise _http_error(400, f"unknown backend {name!r}", "backend")

    def check_design(dm: DesignModel, inflow: Optional[InflowModel],
                     allow_out_of_range):
        try:
            design = WingDesign(dm.c_r, dm.b, dm.taper, dm.sweep_deg)
        except GeometryError as exc:
            raise _http_error(400, str(exc), "design")
        vec = [dm.c_r, dm.b, dm.taper, dm.sweep_deg]
        names = ["c_r", "b", "taper", "sweep_deg"]
        if inflow is not None:
            vec += [inflow.U_inf, inflow.alpha_deg]
            names += ["U_inf", "alpha_deg"]
        bounds = settings.space.bounds
        out = [n for n, v, (lo, hi) in zip(names, vec, bounds)
               if not (lo <= v <= hi)]
        if out and not allow_out_of_range:
            raise _http_error(
                422, f"parameters out of configured range: {', '.join(out)}",
                out[0])
        return design, bool(out)

    @app.exception_handler(HTTPException)
    async def handle_http(request: Request, exc: HTTPException):
        detail = exc.detail
        if not isinstance(detail, dict):
            detail = {"error": True, "detail": str(detail)}
        return JSONResponse(status_code=exc.status_code, content=detail)

    @app.get("/healthz")
    def healthz():
        return JSONResponse(content="ok")

    @app.get("/api/config")
    def config():
        return {
            "bounds": settings.space.to_dict(),
            "datasets": sorted(settings.datasets),
            "backends": ["builtin-liftline"]
            + (["remote"] if settings.remote_endpoint else []),
            "default_resolution": {
                "n_chord": settings.default_resolution.n_chord,
                "n_span": settings.default_resolution.n_span,
            },
        }

    @app.post("/api/mesh", response_model=MeshResponse)
    def api_mesh(req: MeshRequest):
        design, out_of_range = check_design(req.design, None,
                                            req.allow_out_of_range)
        try:
            res = (MeshResolution(req.resolution.n_chord, req.resolution.n_span)
                   if req.resolution else settings.default_resolution)
            mesh = loft_wing(design, res)
        except GeometryError as exc:
            raise _http_error(400, str(exc), "resolution")
        return MeshResponse(
            vertices=mesh.vertices.ravel().tolist(),
            triangles=mesh.triangles.ravel().tolist(),
            n_vertices=len(mesh.vertices),
            n_triangles=len(mesh.triangles),
            metadata=mesh.metadata,
            out_of_range=out_of_range,
        )

    @app.post("/api/predict", response_model=PredictResponse)
    def api_predict(req: PredictRequest):
        design, out_of_range = check_design(req.design, req.inflow,
                                            req.allow_out_of_range)
        try:
            inflow = InflowConditions(req.inflow.U_inf, req.inflow.alpha_deg)
        except ValueError as exc:
            raise _http_error(400, str(exc), "inflow")
        backend = make_backend(req.backend)
        try:
            pred = backend.predict(design, inflow, settings.atmosphere,
                                   with_field=req.fields)
        except SurrogateError as exc:
            raise _http_error(502, f"surrogate backend failed: {exc}")
        resp = PredictResponse(
            C_D=pred.coefficients.C_D,
            C_l=pred.coefficients.C_l,
            lift_to_drag=pred.coefficients.lift_to_drag,
            mach=pred.mach, reynolds=pred.reynolds,
            out_of_range=out_of_range,
            backend_version=pred.provenance.get("version", "unknown"),
        )
        if req.fields and pred.surface_field is not None:
            c_p, c_f = surface_coefficients(
                pred.surface_field, settings.atmosphere, inflow)
            resp.C_p = c_p.tolist()
            resp.C_f = c_f.tolist()
        return resp

    @app.post("/api/optimize", response_model=JobModel)
    def api_optimize(req: OptimizeRequest):
        try:
            optimize.OptimizerConfig(method=req.method, budget=req.budget,
                                     seed=req.seed)
        except optimize.OptimizeError as exc:
            raise _http_error(400, str(exc), "method")
        with jobs_lock:
            if req.idempotency_key:
                existing_id = idempotency.get(req.idempotency_key)
                if existing_id:
                    existing = jobs[existing_id]
                    if existing.request.model_dump() != req.model_dump():
                        raise _http_error(
                            409, "idempotency key reused with different "
                            "parameters", "idempotency_key")
                    return existing.to_model()
            queued = sum(1 for j in jobs.values()
                         if j.status in ("queued", "running"))
            if queued >= settings.max_queued_jobs:
                raise _http_error(409, "job queue is full")
            backend = make_backend(req.backend)
            objective = optimize.Objective(backend, settings.space,
                                           settings.atmosphere)
            job = _Job(uuid.uuid4().hex, req, objective)
            jobs[job.id] = job
            if req.idempotency_key:
                idempotency[req.idempotency_key] = job.id
        job_queue.put(job)
        return job.to_model()

    @app.get("/api/optimize/{job_id}", response_model=JobModel)
    def api_optimize_status(job_id: str):
        with jobs_lock:
            job = jobs.get(job_id)
            if job is None:
                raise _http_error(404, f"unknown job {job_id!r}")
            return job.to_model()

    @app.get("/api/pareto")
    def api_pareto(dataset: str, max_points: int = 5000):
        root = settings.datasets.get(dataset)
        if root is None:
            raise _http_error(404, f"unknown dataset {dataset!r}", "dataset")
        root = Path(root)
        try:
            cases, _, _ = datastore.read_index(root)
        except datastore.DatastoreError as exc:
            raise _http_error(404, str(exc), "dataset")
        coeff_path = root / "coefficients.csv"
        if not coeff_path.exists():
            raise _http_error(404, f"dataset {dataset!r} has no coefficients")
        rows = datastore.import_coefficients_csv(coeff_path)
        if not rows:
            raise _http_error(404, f"dataset {dataset!r} is empty")
        by_id = {c.id: c for c in cases}
        points = []
        for r in rows:
            case = by_id.get(r["id"])
            points.append(PolarPoint(
                id=r["id"], C_D=r["C_D"], C_l=r["C_l"],
                alpha_deg=case.inflow.alpha_deg if case else float("nan"),
                sweep_deg=case.design.sweep_deg if case else None,
            ))
        front = metrics.pareto_front(points)
        scatter = points
        if len(points) > max_points:
            digest = hashlib.sha256(
                "".join(sorted(p.id for p in points)).encode()).digest()
            rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
            idx = np.sort(rng.choice(len(points), size=max_points,
                                     replace=False))
            scatter = [points[i] for i in idx]

        def dump(ps):
            return [{"id": p.id, "C_D": p.C_D, "C_l": p.C_l,
                     "alpha_deg": p.alpha_deg, "sweep_deg": p.sweep_deg}
                    for p in ps]

        return {"front": dump(front), "scatter": dump(scatter),
                "n_total": len(points)}

    return app


def run(host="127.0.0.1", port=8470, settings: Optional[ServiceSettings] = None):
    import uvicorn

    uvicorn.run(create_app(settings), host=host, port=port, log_level="warning")
