"""HTTP what-if service: scenario store, solve jobs, progress streams.

Scenarios are content addressed; jobs are keyed by (scenario, params,
overrides) so identical requests return the same artifacts.  A job is only
marked done after its solution passed independent validation.
"""

from __future__ import annotations

import asyncio
import copy
import hashlib
import json
import logging
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.responses import Response, StreamingResponse

from . import io, model, solve as solve_mod

logger = logging.getLogger(__name__)

OVERRIDE_KEYS = {
    "trip_weights",
    "direction_weights",
    "default_weight",
    "turn_penalty",
    "return_penalty",
    "max_delay",
    "turn_stations",
    "blockage_interval",
}


@dataclass
class ServiceConfig:
    store_path: str = "./railrecover_store"
    worker_cap: int = 2
    default_time_limit: float = 60.0

    @staticmethod
    def from_env() -> "ServiceConfig":
        return ServiceConfig(
            store_path=os.environ.get("RAILRECOVER_STORE", "./railrecover_store"),
            worker_cap=int(os.environ.get("RAILRECOVER_WORKERS", "2")),
            default_time_limit=float(os.environ.get("RAILRECOVER_TIME_LIMIT", "60")),
        )


@dataclass
class Job:
    id: str
    scenario_id: str
    params: dict
    overrides: dict
    state: str = "queued"  # queued | running | done | failed | cancelled
    error: Optional[str] = None
    progress: dict = field(default_factory=dict)
    created_at: float = field(default_factory=time.time)
    extended: bool = False

    def snapshot(self) -> dict:
        return {
            "id": self.id,
            "scenario": self.scenario_id,
            "params": self.params,
            "overrides": self.overrides,
            "state": self.state,
            "error": self.error,
            "progress": dict(self.progress),
        }


class Store:
    """Content-addressed on-disk store for scenarios and job results."""

    def __init__(self, root: str):
        self.root = Path(root)
        (self.root / "scenarios").mkdir(parents=True, exist_ok=True)
        (self.root / "jobs").mkdir(parents=True, exist_ok=True)

    def put_scenario(self, doc: dict) -> str:
        sid = io.scenario_hash(doc)
        path = self.root / "scenarios" / f"{sid}.json"
        if not path.exists():
            path.write_text(json.dumps(doc, indent=2, sort_keys=True))
        return sid

    def get_scenario(self, sid: str) -> Optional[dict]:
        path = self.root / "scenarios" / f"{sid}.json"
        if not path.exists():
            return None
        return json.loads(path.read_text())

    def put_result(self, job_id: str, doc: dict) -> None:
        (self.root / "jobs" / f"{job_id}.json").write_text(json.dumps(doc))

    def get_result(self, job_id: str) -> Optional[dict]:
        path = self.root / "jobs" / f"{job_id}.json"
        if not path.exists():
            return None
        return json.loads(path.read_text())

    def put_job_meta(self, job_id: str, meta: dict) -> None:
        (self.root / "jobs" / f"{job_id}.meta.json").write_text(json.dumps(meta))

    def load_job_metas(self) -> list[dict]:
        metas = []
        for path in sorted(self.root.glob("jobs/*.meta.json")):
            try:
                metas.append(json.loads(path.read_text()))
            except (OSError, json.JSONDecodeError):
                logger.warning("skipping unreadable job meta %s", path)
        return metas


def apply_overrides(doc: dict, overrides: dict) -> dict:
    """Produce the derived scenario document; the original is untouched."""

    unknown = set(overrides) - OVERRIDE_KEYS
    if unknown:
        raise ValueError(f"unknown override fields: {sorted(unknown)}")
    derived = copy.deepcopy(doc)
    policy = derived.setdefault("policy", {})
    for key in (
        "trip_weights",
        "direction_weights",
        "default_weight",
        "turn_penalty",
        "return_penalty",
        "max_delay",
        "turn_stations",
    ):
        if key in overrides:
            policy[key] = overrides[key]
    if "blockage_interval" in overrides:
        if "disruption" not in derived or not derived["disruption"]:
            raise ValueError("blockage_interval override on an undisturbed scenario")
        derived["disruption"]["interval"] = overrides["blockage_interval"]
    return derived


def _solve_params(params: dict, config: ServiceConfig) -> solve_mod.SolveParams:
    unknown = set(params) - {"time_limit", "gap", "seed", "node_selection"}
    if unknown:
        raise ValueError(f"unknown solver parameters: {sorted(unknown)}")
    time_limit = params.get("time_limit")
    if time_limit is None:
        time_limit = config.default_time_limit
    return solve_mod.SolveParams(
        time_limit=float(time_limit),
        gap=float(params.get("gap", 0.0)),
        seed=int(params.get("seed", 0)),
        node_selection=params.get("node_selection", "best-estimate"),
    )


def job_key(scenario_id: str, params: dict, overrides: dict, extended: bool) -> str:
    canon = json.dumps(
        {"s": scenario_id, "p": params, "o": overrides, "e": extended},
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def summarize(outcome_doc: dict, scenario_doc: dict) -> dict:
    """Flat summary the console renders; all numbers trace to the report."""

    report = outcome_doc["report"]
    sol = outcome_doc["solution"]
    return {
        "objective": report["objective"],
        "ok": report["ok"],
        "counts": report["counts"],
        "cancelled": sol["cancelled"],
        "early_turns": sol["early_turns"],
        "early_returns": sol["early_returns"],
        "replacements_used": sol["replacements_used"],
        "trips": outcome_doc["trips"],
        "bounds": outcome_doc["bounds"],
        "scenario_name": scenario_doc.get("name", "scenario"),
    }


def create_app(config: Optional[ServiceConfig] = None) -> FastAPI:
    config = config or ServiceConfig.from_env()
    store = Store(config.store_path)
    app = FastAPI(title="railrecover", version="0.1.0")
    jobs: dict[str, Job] = {}
    cancel_flags: dict[str, threading.Event] = {}
    lock = threading.Lock()
    pool = ThreadPoolExecutor(max_workers=config.worker_cap)

    # reload history: completed jobs survive restarts, interrupted ones are
    # marked failed (their solver thread is gone)
    for meta in store.load_job_metas():
        job = Job(
            id=meta["id"],
            scenario_id=meta["scenario"],
            params=meta.get("params", {}),
            overrides=meta.get("overrides", {}),
            state=meta.get("state", "failed"),
            error=meta.get("error"),
            progress=meta.get("progress", {}),
            extended=meta.get("extended", False),
        )
        if job.state in ("queued", "running"):
            job.state = "failed"
            job.error = "interrupted by service restart"
        jobs[job.id] = job
        cancel_flags[job.id] = threading.Event()

    def persist_job(job: Job) -> None:
        store.put_job_meta(
            job.id, {**job.snapshot(), "extended": job.extended}
        )

    def run_job(job: Job, scenario_doc: dict) -> None:
        with lock:
            if job.state == "cancelled":
                return
            job.state = "running"
        flag = cancel_flags[job.id]
        try:
            scenario = io.parse_scenario(scenario_doc)
            params = _solve_params(job.params, config)

            def on_progress(p: solve_mod.Progress):
                with lock:
                    job.progress = {
                        "nodes": p.nodes,
                        "primal": p.primal,
                        "dual": p.dual,
                        "gap": p.gap,
                        "elapsed": round(p.elapsed, 3),
                    }

            outcome = solve_mod.solve_scenario(
                scenario,
                params=params,
                extended=job.extended,
                progress=on_progress,
                stop=flag.is_set,
            )
            result = outcome.result
            if outcome.solution is None or outcome.report is None:
                with lock:
                    job.state = "cancelled" if flag.is_set() else "failed"
                    job.error = f"no solution (status {result.status})"
                persist_job(job)
                return
            if not outcome.report.ok:
                with lock:
                    job.state = "failed"
                    job.error = "solution failed verification"
                persist_job(job)
                return
            scenario_digest = io.scenario_hash(scenario_doc)
            doc = io.write_solution(outcome.solution, outcome.report, scenario_digest)
            trip_rows = _trip_assignments(outcome, scenario)
            stored = {
                **doc,
                "status": result.status,
                "bounds": {
                    "primal": result.objective,
                    "dual": result.bound,
                    "gap": result.gap,
                    "nodes": result.nodes,
                    "wall_time": round(result.wall_time, 3),
                },
                "trips": trip_rows,
                "stats": outcome.stats,
            }
            store.put_result(job.id, stored)
            with lock:
                job.progress = {
                    "nodes": result.nodes,
                    "primal": result.objective,
                    "dual": result.bound,
                    "gap": result.gap,
                    "elapsed": round(result.wall_time, 3),
                }
                job.state = "cancelled" if flag.is_set() else "done"
            persist_job(job)
        except Exception as exc:
            logger.exception("job %s failed", job.id)
            with lock:
                job.state = "failed"
                job.error = str(exc)
            persist_job(job)

    @app.get("/healthz")
    def healthz():
        return {"ok": True}

    @app.post("/scenarios", status_code=201)
    def create_scenario(doc: dict):
        try:
            io.parse_scenario(doc)
        except io.ScenarioFormatError as exc:
            raise HTTPException(
                status_code=422, detail={"path": exc.path, "message": str(exc)}
            )
        sid = store.put_scenario(doc)
        return {"id": sid}

    @app.get("/scenarios/{sid}")
    def get_scenario(sid: str):
        doc = store.get_scenario(sid)
        if doc is None:
            raise HTTPException(status_code=404, detail="unknown scenario")
        return doc

    @app.post("/scenarios/{sid}/solve", status_code=202)
    def start_solve(sid: str, body: Optional[dict] = None):
        doc = store.get_scenario(sid)
        if doc is None:
            raise HTTPException(status_code=404, detail="unknown scenario")
        body = body or {}
        params = body.get("params", {})
        overrides = body.get("overrides", {})
        extended = bool(body.get("extended_objective", False))
        try:
            derived = apply_overrides(doc, overrides)
            io.parse_scenario(derived)
            _solve_params(params, config)
        except (ValueError, io.ScenarioFormatError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        derived_id = store.put_scenario(derived) if overrides else sid
        jid = job_key(derived_id, params, overrides, extended)
        with lock:
            existing = jobs.get(jid)
            if existing is not None and existing.state != "failed":
                return {"job_id": jid, "scenario": derived_id, "existing": True}
            job = Job(
                id=jid,
                scenario_id=derived_id,
                params=params,
                overrides=overrides,
                extended=extended,
            )
            jobs[jid] = job
            cancel_flags[jid] = threading.Event()
        persist_job(job)
        pool.submit(run_job, job, derived)
        return {"job_id": jid, "scenario": derived_id, "existing": False}

    def _job_or_404(jid: str) -> Job:
        job = jobs.get(jid)
        if job is None:
            raise HTTPException(status_code=404, detail="unknown job")
        return job

    @app.get("/jobs/{jid}")
    def get_job(jid: str):
        with lock:
            return _job_or_404(jid).snapshot()

    @app.post("/jobs/{jid}/cancel")
    def cancel_job(jid: str):
        job = _job_or_404(jid)
        cancel_flags[jid].set()
        with lock:
            if job.state == "queued":
                job.state = "cancelled"
            snap = job.snapshot()
        persist_job(job)
        return snap

    @app.get("/jobs/{jid}/events")
    async def stream_events(jid: str):
        _job_or_404(jid)

        async def gen():
            last_payload = None
            while True:
                with lock:
                    job = jobs[jid]
                    payload = json.dumps(
                        {"state": job.state, **job.progress}, sort_keys=True
                    )
                    terminal = job.state in ("done", "failed", "cancelled")
                if payload != last_payload:
                    yield f"data: {payload}\n\n"
                    last_payload = payload
                if terminal:
                    return
                await asyncio.sleep(0.1)

        return StreamingResponse(gen(), media_type="text/event-stream")

    @app.get("/jobs/{jid}/solution")
    def get_solution(jid: str, format: str = "document"):
        job = _job_or_404(jid)
        with lock:
            state = job.state
        result = store.get_result(jid)
        if state not in ("done", "cancelled") or result is None:
            raise HTTPException(
                status_code=409, detail=f"job not finished (state {state})"
            )
        if format == "document":
            return result
        if format == "summary":
            scenario_doc = store.get_scenario(job.scenario_id)
            return summarize(result, scenario_doc)
        if format == "diagram":
            scenario_doc = store.get_scenario(job.scenario_id)
            scenario = io.parse_scenario(scenario_doc)
            solution, _ = io.read_solution(result)
            svg = io.render_time_space_diagram(scenario, solution)
            return Response(content=svg, media_type="image/svg+xml")
        raise HTTPException(status_code=422, detail=f"unknown format {format}")

    return app


def _trip_assignments(outcome: solve_mod.RecoveryOutcome, scenario) -> list[dict]:
    """Per-trip realized assignment: serving train and realized times."""

    sol = outcome.solution
    net = outcome.network
    serving: dict[str, str] = {}
    for train, chain in sol.circulations.items():
        for trip in chain:
            serving[trip] = train
    rows = []
    for trip in sorted(net.drive_by_trip):
        t = scenario.timetable.trip(trip)
        served = trip in serving
        dep = t.dep + sol.delays.get(model.dep_id(trip), 0) if served else None
        arr = t.arr + sol.delays.get(model.arr_id(trip), 0) if served else None
        rows.append(
            {
                "trip": trip,
                "scheduled_train": t.train,
                "train": serving.get(trip),
                "served": served,
                "dep": dep,
                "arr": arr,
                "scheduled_dep": t.dep,
                "scheduled_arr": t.arr,
            }
        )
    return rows


def main() -> None:
    import uvicorn

    logging.basicConfig(level=logging.INFO)
    config = ServiceConfig.from_env()
    host = os.environ.get("RAILRECOVER_HOST", "127.0.0.1")
    port = int(os.environ.get("RAILRECOVER_PORT", "8000"))
    uvicorn.run(create_app(config), host=host, port=port)


if __name__ == "__main__":
    main()
