"""HTTP API for curation and reports, consumed by the browser UI.

Queue items are leased to one curator at a time with a reclaim timeout,
labels are durably appended before acknowledgment, and no queue payload
ever contains a tool identifier.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass

from fastapi import FastAPI, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import criteria as criteria_mod
from .config import PipelineConfig
from .curation import (
    DECISIONS,
    CurationItem,
    CurationLabel,
    DuplicateLabelError,
    IncompleteCurationError,
    PassOrderError,
    UnknownItemError,
)
from .pipeline import Pipeline
from .reports import render_report


@dataclass
class Lease:
    curator: str
    expires_at: float


class LeaseManager:
    """Hands each pending item to at most one curator at a time; leases
    expire after the timeout so abandoned items return to the pool."""

    def __init__(self, timeout_seconds: float):
        self.timeout = timeout_seconds
        self._leases: dict[str, Lease] = {}

    @staticmethod
    def key(item: CurationItem) -> str:
        return f"{item.item_id}:{item.pass_number}"

    def _reclaim(self, now: float):
        expired = [k for k, lease in self._leases.items() if lease.expires_at <= now]
        for k in expired:
            del self._leases[k]

    def acquire_next(self, pending: list[CurationItem], curator: str) -> CurationItem | None:
        now = time.monotonic()
        self._reclaim(now)
        # idempotent poll: an unexpired lease held by this curator wins
        for item in pending:
            lease = self._leases.get(self.key(item))
            if lease and lease.curator == curator:
                lease.expires_at = now + self.timeout
                return item
        for item in pending:
            if self.key(item) not in self._leases:
                self._leases[self.key(item)] = Lease(curator, now + self.timeout)
                return item
        return None

    def holder(self, item: CurationItem) -> str | None:
        now = time.monotonic()
        self._reclaim(now)
        lease = self._leases.get(self.key(item))
        return lease.curator if lease else None

    def release(self, item: CurationItem):
        self._leases.pop(self.key(item), None)


class ServiceState:
    """Shared state behind the endpoints; one writer lock serializes all
    queue and label mutations."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.pipeline = Pipeline(config)
        self.lock = threading.RLock()
        self.leases = LeaseManager(config.lease_timeout_seconds)
        self.store = self.pipeline.label_store()

    def criteria_ids(self) -> list[str]:
        return self.pipeline.active_criteria()

    def item_payload(self, item: CurationItem) -> dict:
        return {
            "item_id": item.item_id,
            "pmcid": item.pmcid,
            "criterion": item.criterion,
            "criterion_description": criteria_mod.DESCRIPTIONS.get(item.criterion, ""),
            "paper_link": item.paper_link,
            "displayed_evidence": item.displayed_evidence,
            "origin": item.origin,
            "pass": item.pass_number,
        }

    def next_item(self, criterion: str, curator: str) -> CurationItem | None:
        with self.lock:
            pending = self.store.pending_items(criterion)
            return self.leases.acquire_next(pending, curator)

    def submit_label(self, label: CurationLabel) -> CurationLabel:
        with self.lock:
            item = self.store.items.get(label.item_id)
            if item is not None:
                leased_item = CurationItem(
                    item_id=item.item_id, pmcid=item.pmcid,
                    criterion=item.criterion, paper_link=item.paper_link,
                    origin=item.origin, pass_number=label.pass_number,
                    displayed_evidence=item.displayed_evidence,
                )
                holder = self.leases.holder(leased_item)
                if holder is not None and holder != label.curator:
                    raise DuplicateLabelError(
                        f"item {label.item_id} is leased to another curator"
                    )
            stored = self.store.record_label(label)
            if item is not None:
                self.leases.release(leased_item)
            return stored


def create_app(config: PipelineConfig) -> FastAPI:
    state = ServiceState(config)
    app = FastAPI(title="rigorscreen curation service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.service = state

    @app.get("/api/criteria")
    def list_criteria():
        out = []
        for criterion in state.criteria_ids():
            progress = state.store.progress(criterion)
            out.append({
                "id": criterion,
                "description": criteria_mod.DESCRIPTIONS.get(criterion, ""),
                "progress": progress,
            })
        return out

    @app.get("/api/queue/next")
    def queue_next(criterion: str = Query(...), curator: str = Query(...)):
        if criterion not in state.criteria_ids():
            return JSONResponse({"error": f"unknown criterion {criterion!r}"},
                                status_code=404)
        if not curator:
            return JSONResponse({"error": "curator is required"}, status_code=400)
        item = state.next_item(criterion, curator)
        if item is None:
            return {"done": True, "progress": state.store.progress(criterion)}
        return {"done": False, "item": state.item_payload(item)}

    @app.post("/api/labels")
    def post_label(body: dict):
        fields = {"item_id", "decision", "curator"}
        missing = sorted(fields - set(body))
        if missing:
            return JSONResponse(
                {"error": "missing fields", "fields": missing}, status_code=400
            )
        if body["decision"] not in DECISIONS:
            return JSONResponse(
                {"error": "invalid decision", "fields": ["decision"],
                 "allowed": list(DECISIONS)},
                status_code=400,
            )
        label = CurationLabel(
            item_id=body["item_id"],
            decision=body["decision"],
            curator=body["curator"],
            pass_number=int(body.get("pass", body.get("pass_number", 1))),
            notes=body.get("notes", ""),
            notes2=body.get("notes2", ""),
        )
        try:
            stored = state.submit_label(label)
        except UnknownItemError:
            return JSONResponse({"error": f"unknown item {label.item_id!r}"},
                                status_code=404)
        except DuplicateLabelError as exc:
            return JSONResponse({"error": str(exc)}, status_code=409)
        except PassOrderError as exc:
            return JSONResponse({"error": str(exc), "fields": ["pass"]},
                                status_code=409)
        return {
            "stored": True,
            "item_id": stored.item_id,
            "pass": stored.pass_number,
            "decision": stored.decision,
            "pass2_queued": stored.decision == "complicated" and stored.pass_number == 1,
        }

    @app.get("/api/progress")
    def progress(criterion: str = Query(...)):
        if criterion not in state.criteria_ids():
            return JSONResponse({"error": f"unknown criterion {criterion!r}"},
                                status_code=404)
        return state.store.progress(criterion)

    @app.get("/api/reports/{criterion}")
    def report(criterion: str, format: str = Query("md")):
        if format not in ("md", "csv", "json"):
            return JSONResponse({"error": f"unknown format {format!r}"},
                                status_code=400)
        if criterion not in state.criteria_ids():
            return JSONResponse({"error": f"unknown criterion {criterion!r}"},
                                status_code=404)
        with state.lock:
            loaded = state.pipeline.load_report(criterion)
            if loaded is None:
                state.store.reload()  # pick up labels recorded out of process
                try:
                    loaded = state.pipeline.evaluate(criterion, state.store)
                except IncompleteCurationError as exc:
                    return JSONResponse(
                        {"status": "pending", "unresolved": len(exc.item_ids)},
                        status_code=404,
                    )
        if format == "json":
            return {"criterion": criterion, "format": "json",
                    "report": loaded.to_dict()}
        content = render_report(loaded, format).decode("utf-8")
        return {"criterion": criterion, "format": format, "content": content}

    return app


def serve(config: PipelineConfig, host: str = "127.0.0.1"):
    """Run the curation service until interrupted."""
    import uvicorn

    uvicorn.run(create_app(config), host=host, port=config.effective_port)
