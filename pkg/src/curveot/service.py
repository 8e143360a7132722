"""HTTP facade over the pipeline for the explorer UI.

Single-process service: datasets and results live under one data
directory, matrix jobs run on a small worker pool, and identical
(dataset, config) submissions return the cached result. Responses are
plain JSON; errors carry {code, message, detail}.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request, UploadFile
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .clustering import DistanceMatrix, hierarchical_cluster, pairwise_matrix, to_newick
from .errors import CurveOTError
from .io_formats import load_curve_csv, load_matrix, save_matrix
from .measures import WeightScheme, build_measure, resolve_support
from .pipeline import PipelineConfig, transport_pair

MAX_CURVES = 200
MAX_POINTS = 5000

PAIR_WORKERS = 4


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, detail=None):
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail
        super().__init__(message)


@dataclass
class Job:
    id: str
    kind: str
    state: str = "queued"  # queued -> running -> done | failed
    pairs_done: int = 0
    pairs_total: int = 0
    result: str | None = None
    error: str | None = None

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "state": self.state,
            "progress": {"done": self.pairs_done, "total": self.pairs_total},
            "result": self.result,
            "error": self.error,
        }


@dataclass
class Store:
    """Disk-backed state: datasets, matrices, and the job registry."""

    root: Path
    jobs: dict[str, Job] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def __post_init__(self):
        for sub in ("datasets", "matrices", "jobs"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)
        for path in (self.root / "jobs").glob("*.json"):
            obj = json.loads(path.read_text())
            job = Job(
                id=obj["id"],
                kind=obj["kind"],
                state=obj["state"],
                pairs_done=obj["progress"]["done"],
                pairs_total=obj["progress"]["total"],
                result=obj["result"],
                error=obj["error"],
            )
            if job.state in ("queued", "running"):
                job.state = "failed"
                job.error = "interrupted by service restart"
            self.jobs[job.id] = job

    def persist_job(self, job: Job):
        (self.root / "jobs" / f"{job.id}.json").write_text(
            json.dumps(job.to_json()) + "\n"
        )

    def dataset_dir(self, dataset_id: str) -> Path:
        d = self.root / "datasets" / dataset_id
        if not d.exists():
            raise ApiError(404, "dataset_not_found", f"no dataset {dataset_id!r}")
        return d

    def load_curves(self, dataset_id: str):
        d = self.dataset_dir(dataset_id)
        manifest = json.loads((d / "manifest.json").read_text())
        return [load_curve_csv(d / entry["path"], id=entry["id"]) for entry in manifest["curves"]]

    def matrix_path(self, matrix_id: str) -> Path:
        p = self.root / "matrices" / f"{matrix_id}.csv"
        if not p.exists():
            raise ApiError(404, "matrix_not_found", f"no matrix {matrix_id!r}")
        return p


def _digest(*chunks: bytes) -> str:
    h = hashlib.sha256()
    for chunk in chunks:
        h.update(chunk)
        h.update(b"\x00")
    return h.hexdigest()[:16]


def _parse_config(obj) -> PipelineConfig:
    try:
        return PipelineConfig.from_json(obj)
    except (CurveOTError, ValueError) as e:
        raise ApiError(400, "bad_config", str(e)) from e


def create_app(data_dir: str | Path, ui_dir: str | Path | None = None) -> FastAPI:
    store = Store(root=Path(data_dir))
    pool = ThreadPoolExecutor(max_workers=2, thread_name_prefix="curveot-job")
    app = FastAPI(title="curveot", version="0.1.0")

    @app.exception_handler(ApiError)
    async def api_error_handler(_req: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"code": exc.code, "message": exc.message, "detail": exc.detail},
        )

    @app.exception_handler(CurveOTError)
    async def domain_error_handler(_req: Request, exc: CurveOTError):
        return JSONResponse(
            status_code=400,
            content={"code": type(exc).__name__, "message": str(exc), "detail": None},
        )

    @app.post("/datasets")
    async def upload_dataset(manifest: UploadFile, curves: list[UploadFile]):
        manifest_bytes = await manifest.read()
        try:
            mobj = json.loads(manifest_bytes)
            entries = mobj["curves"]
        except (json.JSONDecodeError, KeyError, TypeError) as e:
            raise ApiError(400, "bad_manifest", f"manifest: {e}") from e
        if len(entries) > MAX_CURVES:
            raise ApiError(400, "too_many_curves", f"{len(entries)} > {MAX_CURVES}")
        uploads = {}
        for f in curves:
            uploads[f.filename] = await f.read()
        ids = set()
        for entry in entries:
            cid, cpath = entry.get("id"), entry.get("path")
            if not cid or cid in ids:
                raise ApiError(400, "bad_manifest", f"missing or duplicate id {cid!r}")
            ids.add(cid)
            if cpath not in uploads:
                raise ApiError(400, "missing_file", f"no upload for path {cpath!r}")

        dataset_id = _digest(manifest_bytes, *(uploads[e["path"]] for e in entries))
        ddir = store.root / "datasets" / dataset_id
        if not ddir.exists():
            ddir.mkdir(parents=True)
            (ddir / "manifest.json").write_bytes(manifest_bytes)
            for entry in entries:
                name = Path(entry["path"]).name
                (ddir / name).write_bytes(uploads[entry["path"]])
                entry["path"] = name
            (ddir / "manifest.json").write_text(json.dumps(mobj))
            for curve in store.load_curves(dataset_id):  # validate now
                if len(curve) > MAX_POINTS:
                    for p in ddir.iterdir():
                        p.unlink()
                    ddir.rmdir()
                    raise ApiError(
                        400, "curve_too_long", f"{curve.id}: {len(curve)} > {MAX_POINTS}"
                    )
        return {"id": dataset_id}

    @app.get("/datasets/{dataset_id}")
    def get_dataset(dataset_id: str):
        curves = store.load_curves(dataset_id)
        d = store.dataset_dir(dataset_id)
        manifest = json.loads((d / "manifest.json").read_text())
        return {
            "id": dataset_id,
            "name": manifest.get("name", dataset_id),
            "curves": [{"id": c.id, "points": len(c)} for c in curves],
        }

    @app.get("/datasets/{dataset_id}/curves/{curve_id}")
    def get_curve(dataset_id: str, curve_id: str):
        for c in store.load_curves(dataset_id):
            if c.id == curve_id:
                return {"id": c.id, "points": c.points.tolist()}
        raise ApiError(404, "curve_not_found", f"no curve {curve_id!r}")

    def _run_matrix_job(job: Job, dataset_id: str, config: PipelineConfig):
        with store.lock:
            job.state = "running"
        try:
            curves = store.load_curves(dataset_id)

            def progress(done, total):
                with store.lock:
                    job.pairs_done = done
                    job.pairs_total = total

            n = len(curves)
            job.pairs_total = n * (n - 1) // 2
            dm = pairwise_matrix(curves, config, jobs=PAIR_WORKERS, progress=progress)
            save_matrix(dm, store.root / "matrices" / f"{job.id}.csv")
            with store.lock:
                job.result = job.id
                job.state = "done"
        except Exception as e:  # noqa: BLE001 - job boundary
            with store.lock:
                job.state = "failed"
                job.error = str(e)
        store.persist_job(job)

    @app.post("/jobs/matrix")
    def submit_matrix(body: dict):
        dataset_id = body.get("dataset")
        if not dataset_id:
            raise ApiError(400, "bad_request", "body needs a 'dataset' id")
        store.dataset_dir(dataset_id)
        config = _parse_config(body.get("config", {}))
        job_id = _digest(
            dataset_id.encode(),
            json.dumps(config.to_json(), sort_keys=True).encode(),
        )
        with store.lock:
            existing = store.jobs.get(job_id)
            if existing is not None and existing.state != "failed":
                return {"id": job_id, "cached": existing.state == "done"}
            job = Job(id=job_id, kind="matrix")
            store.jobs[job_id] = job
        pool.submit(_run_matrix_job, job, dataset_id, config)
        return {"id": job_id, "cached": False}

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        with store.lock:
            job = store.jobs.get(job_id)
            if job is None:
                raise ApiError(404, "job_not_found", f"no job {job_id!r}")
            return job.to_json()

    @app.get("/matrices/{matrix_id}")
    def get_matrix(matrix_id: str):
        dm = load_matrix(store.matrix_path(matrix_id))
        return {"id": matrix_id, "labels": list(dm.labels), "entries": dm.entries.tolist()}

    @app.post("/cluster")
    def cluster(body: dict):
        matrix_id = body.get("matrix")
        if not matrix_id:
            raise ApiError(400, "bad_request", "body needs a 'matrix' id")
        linkage = body.get("linkage", "average")
        if linkage not in ("single", "complete", "average", "ward"):
            raise ApiError(400, "bad_linkage", f"unknown linkage {linkage!r}")
        dm = load_matrix(store.matrix_path(matrix_id))
        dend = hierarchical_cluster(dm, linkage)
        return {"matrix": matrix_id, "linkage": linkage, "newick": to_newick(dend), **dend.to_json()}

    @app.get("/plan")
    def get_plan(dataset: str, a: str, b: str, config: str = "{}"):
        curves = {c.id: c for c in store.load_curves(dataset)}
        for cid in (a, b):
            if cid not in curves:
                raise ApiError(404, "curve_not_found", f"no curve {cid!r}")
        try:
            cfg = _parse_config(json.loads(config))
        except json.JSONDecodeError as e:
            raise ApiError(400, "bad_config", f"config: {e}") from e
        result = transport_pair(curves[a], curves[b], cfg)
        return {
            "a": a,
            "b": b,
            "objective": result.distance,
            "transported_mass": result.plan.transported_mass,
            "coupling": result.plan.pi.tolist(),
            "measure_a": result.measure_a.weights.tolist(),
            "measure_b": result.measure_b.weights.tolist(),
            "points_a": result.curve_a.points.tolist(),
            "points_b": result.curve_b.points.tolist(),
        }

    @app.get("/schemes/preview")
    def preview_scheme(dataset: str, curve: str, scheme: str):
        curves = {c.id: c for c in store.load_curves(dataset)}
        if curve not in curves:
            raise ApiError(404, "curve_not_found", f"no curve {curve!r}")
        try:
            ws = WeightScheme.from_json(json.loads(scheme))
        except (json.JSONDecodeError, ValueError) as e:
            raise ApiError(400, "bad_scheme", str(e)) from e
        c = curves[curve]
        measure = build_measure(c, ws)
        out = {
            "curve": curve,
            "weights": measure.weights.tolist(),
            "total": measure.total,
        }
        if ws.support is not None:
            k1, k2 = resolve_support(c, ws.support)
            out["window"] = [k1, k2]
        return out

    if ui_dir is None:
        ui_dir = os.environ.get("CURVEOT_UI_DIR")
    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    return app


def main():
    import uvicorn

    addr = os.environ.get("CURVEOT_ADDR", "127.0.0.1:8000")
    host, _, port = addr.rpartition(":")
    data_dir = os.environ.get("CURVEOT_DATA", "curveot-data")
    candidates = [Path("frontend/dist"), Path(__file__).resolve().parents[2] / "frontend" / "dist"]
    ui = next((c for c in candidates if c.is_dir()), None)
    app = create_app(data_dir, ui_dir=ui)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))


if __name__ == "__main__":
    main()
