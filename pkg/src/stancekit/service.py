"""HTTP annotation service with append-only persistence.

The store is an event-sourced state machine: every session creation and
vote lands as one JSON line in ``events.jsonl`` before it takes effect,
so replaying the log after a crash reconstructs the exact pre-crash
state. Votes are immutable; a correction is a new vote that supersedes
the old one by timestamp.

Endpoints live under ``/api/v1/`` and speak JSON. Errors carry a
machine-readable ``error`` code (UnknownSession, DuplicateVote,
InvalidLabel) alongside a human-readable detail.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .core import (
    EnrichedRecord,
    ExplicitObject,
    StanceLabel,
    StanceRecord,
    derive_alignment,
    validate_enriched,
)
from .enrich import cohen_kappa, detect_explicit_mention, majority_label, propose_adversarial_pair
from .errors import (
    ConfigError,
    DuplicateVote,
    InvalidLabel,
    NoDisalignedObject,
    UndefinedAlignment,
    UnknownSession,
)

ASSIGNMENT_MODES = ("overlap", "partitioned")


@dataclass(frozen=True)
class BatchItem:
    """One enrichment item: a record plus its candidate explicit objects."""

    record: StanceRecord
    candidates: tuple[ExplicitObject, ...]

    def to_dict(self) -> dict:
        return {
            "record": self.record.to_dict(),
            "candidates": [c.to_dict() for c in self.candidates],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BatchItem":
        return cls(
            record=StanceRecord.from_dict(d["record"]),
            candidates=tuple(ExplicitObject.from_dict(c) for c in d["candidates"]),
        )


def write_batch_jsonl(path, items) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for item in items:
            fh.write(json.dumps(item.to_dict(), ensure_ascii=False) + "\n")


def read_batch_jsonl(path) -> list[BatchItem]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(BatchItem.from_dict(json.loads(line)))
    return out


@dataclass
class Session:
    session_id: str
    annotator_id: str
    created: float
    updated: float
    served: set = field(default_factory=set)  # record ids already handed out


class AnnotationStore:
    """Event-sourced session/vote state over an enrichment batch.

    All writes are serialized through one lock and appended to the log
    before mutating in-memory state; reads take consistent snapshots
    under the same lock (queries are cheap at this scale).
    """

    def __init__(self, batch: list[BatchItem], log_path,
                 assignment: str = "overlap", overlap_every: int = 5):
        if assignment not in ASSIGNMENT_MODES:
            raise ConfigError(f"assignment mode must be one of {ASSIGNMENT_MODES}")
        self.batch = list(batch)
        self.by_record_id = {item.record.id: item for item in self.batch}
        if len(self.by_record_id) != len(self.batch):
            raise ConfigError("enrichment batch contains duplicate record ids")
        self.log_path = Path(log_path)
        self.assignment = assignment
        self.overlap_every = overlap_every
        self.sessions: dict[str, Session] = {}
        self.votes: list[dict] = []
        self._lock = threading.Lock()
        self._session_seq = 0
        if self.log_path.exists():
            self._replay()

    # --- persistence --------------------------------------------------------

    def _append(self, event: dict) -> None:
        with open(self.log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, ensure_ascii=False, sort_keys=True) + "\n")
            fh.flush()

    def _replay(self) -> None:
        with open(self.log_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    self._apply(json.loads(line))

    def _apply(self, event: dict) -> None:
        if event["type"] == "session":
            sid = event["session_id"]
            self.sessions[sid] = Session(
                session_id=sid,
                annotator_id=event["annotator_id"],
                created=event["ts"],
                updated=event["ts"],
            )
            self._session_seq = max(self._session_seq, int(sid.split("-")[-1]) + 1)
        elif event["type"] == "vote":
            self.votes.append(event)
            sess = self.sessions.get(event["session_id"])
            if sess is not None:
                sess.updated = event["ts"]
                sess.served.add(event["record_id"])

    # --- sessions -----------------------------------------------------------

    def create_session(self, annotator_id: str) -> Session:
        if not annotator_id or not annotator_id.strip():
            raise ConfigError("annotator_id must be non-empty")
        with self._lock:
            sid = f"s-{self._session_seq}"
            self._session_seq += 1
            now = time.time()
            self._append({
                "type": "session", "session_id": sid,
                "annotator_id": annotator_id, "ts": now,
            })
            self._apply({
                "type": "session", "session_id": sid,
                "annotator_id": annotator_id, "ts": now,
            })
            return self.sessions[sid]

    def _session(self, session_id: str) -> Session:
        sess = self.sessions.get(session_id)
        if sess is None:
            raise UnknownSession(f"no session {session_id!r}")
        return sess

    def _assigned_items(self, sess: Session) -> list[BatchItem]:
        if self.assignment == "overlap":
            return self.batch
        annotators = sorted({s.annotator_id for s in self.sessions.values()})
        slot = annotators.index(sess.annotator_id)
        out = []
        for i, item in enumerate(self.batch):
            shared = self.overlap_every and i % self.overlap_every == 0
            if shared or i % len(annotators) == slot:
                out.append(item)
        return out

    def next_item(self, session_id: str) -> Optional[BatchItem]:
        """The first assigned item this annotator has not voted on; None when exhausted."""
        with self._lock:
            sess = self._session(session_id)
            voted = {
                v["record_id"] for v in self.votes
                if v["annotator_id"] == sess.annotator_id
            }
            for item in self._assigned_items(sess):
                n_objects = len(item.candidates)
                done = sum(
                    1 for v in self.votes
                    if v["annotator_id"] == sess.annotator_id
                    and v["record_id"] == item.record.id
                )
                if item.record.id not in voted or done < n_objects:
                    return item
            return None

    # --- votes --------------------------------------------------------------

    def submit_vote(self, session_id: str, record_id: str, object_surface: str,
                    label: str, correction: bool = False) -> dict:
        with self._lock:
            sess = self._session(session_id)
            item = self.by_record_id.get(record_id)
            if item is None:
                raise UnknownSession(f"record {record_id!r} is not part of this batch")
            if object_surface not in {c.surface for c in item.candidates}:
                raise InvalidLabel(f"object {object_surface!r} is not a candidate of {record_id!r}")
            try:
                stance = StanceLabel.from_string(label)
            except ValueError as exc:
                raise InvalidLabel(f"label {label!r} is not FAVOR/AGAINST/NONE") from exc
            duplicate = any(
                v["annotator_id"] == sess.annotator_id
                and v["record_id"] == record_id
                and v["object_surface"] == object_surface
                for v in self.votes
            )
            if duplicate and not correction:
                raise DuplicateVote(
                    f"annotator {sess.annotator_id!r} already voted on "
                    f"({record_id!r}, {object_surface!r})"
                )
            try:
                alignment = derive_alignment(stance, item.record.label)
            except UndefinedAlignment:
                alignment = None
            event = {
                "type": "vote",
                "session_id": session_id,
                "annotator_id": sess.annotator_id,
                "record_id": record_id,
                "object_surface": object_surface,
                "label": stance.value,
                "correction": bool(correction),
                "ts": time.time(),
            }
            self._append(event)
            self._apply(event)
            return {
                "record_id": record_id,
                "object_surface": object_surface,
                "label": stance.value,
                "alignment": alignment,
                "correction": bool(correction),
            }

    def _effective_votes(self) -> dict:
        """Latest vote per (record, object, annotator); corrections supersede."""
        latest: dict[tuple[str, str, str], dict] = {}
        for v in self.votes:
            key = (v["record_id"], v["object_surface"], v["annotator_id"])
            prev = latest.get(key)
            if prev is None or v["ts"] >= prev["ts"]:
                latest[key] = v
        return latest

    # --- reporting ----------------------------------------------------------

    def progress(self) -> dict:
        with self._lock:
            per_session = {
                s.session_id: {
                    "annotator_id": s.annotator_id,
                    "votes": sum(1 for v in self.votes if v["session_id"] == s.session_id),
                }
                for s in self.sessions.values()
            }
            total_objects = sum(len(item.candidates) for item in self.batch)
            return {
                "items": len(self.batch),
                "objects": total_objects,
                "votes": len(self.votes),
                "sessions": per_session,
            }

    def agreement(self) -> dict:
        """Pairwise Cohen's kappa over annotators sharing at least one item."""
        with self._lock:
            latest = self._effective_votes()
            by_annotator: dict[str, dict] = {}
            for (rec_id, surface, annot), v in latest.items():
                by_annotator.setdefault(annot, {})[(rec_id, surface)] = StanceLabel(v["label"])
            annotators = sorted(by_annotator)
            pairs = []
            for i, a in enumerate(annotators):
                for b in annotators[i + 1:]:
                    shared = sorted(set(by_annotator[a]) & set(by_annotator[b]))
                    if not shared:
                        continue
                    kappa = cohen_kappa(
                        [by_annotator[a][k] for k in shared],
                        [by_annotator[b][k] for k in shared],
                    )
                    pairs.append({
                        "annotator_a": a, "annotator_b": b,
                        "shared_items": len(shared), "kappa": kappa,
                    })
            return {"pairs": pairs}

    def export(self) -> list[EnrichedRecord]:
        """Adversarially paired EnrichedRecords for items with resolved labels.

        Ties and items without a dis-aligned object are skipped; every
        exported record passes validation with zero violations.
        """
        with self._lock:
            latest = self._effective_votes()
            by_item: dict[str, dict[str, list[StanceLabel]]] = {}
            for (rec_id, surface, _), v in latest.items():
                by_item.setdefault(rec_id, {}).setdefault(surface, []).append(
                    StanceLabel(v["label"])
                )
            out = []
            for item in self.batch:
                votes = by_item.get(item.record.id)
                if not votes or not item.record.label.is_polar:
                    continue
                labeled = []
                for cand in item.candidates:
                    if cand.surface not in votes:
                        continue
                    resolved = majority_label(votes[cand.surface])
                    if resolved is None:
                        continue  # tie: unresolved, excluded from export
                    labeled.append(
                        ExplicitObject(
                            surface=cand.surface, char_start=cand.char_start,
                            char_end=cand.char_end, label=resolved,
                        )
                    )
                if not labeled:
                    continue
                try:
                    enriched = propose_adversarial_pair(item.record, labeled)
                except NoDisalignedObject:
                    continue
                if validate_enriched(enriched) == []:
                    out.append(enriched)
            return out

    def state_snapshot(self) -> bytes:
        """Canonical byte serialization of the full mutable state."""
        with self._lock:
            state = {
                "sessions": [
                    {
                        "session_id": s.session_id,
                        "annotator_id": s.annotator_id,
                        "created": s.created,
                        "updated": s.updated,
                        "served": sorted(s.served),
                    }
                    for s in sorted(self.sessions.values(), key=lambda s: s.session_id)
                ],
                "votes": self.votes,
            }
        export = [e.to_dict() for e in self.export()]
        state["export"] = export
        return json.dumps(state, sort_keys=True, ensure_ascii=False).encode("utf-8")


def create_app(store: AnnotationStore, ui_dir=None):
    """FastAPI application over an AnnotationStore."""
    from fastapi import FastAPI, Request
    from fastapi.responses import JSONResponse

    from .errors import StancekitError

    app = FastAPI(title="stancekit annotation service")
    app.state.store = store

    status_codes = {
        "UnknownSession": 404,
        "DuplicateVote": 409,
        "InvalidLabel": 422,
        "ConfigError": 400,
    }

    @app.exception_handler(StancekitError)
    async def _stancekit_error(request: Request, exc: StancekitError):
        return JSONResponse(
            status_code=status_codes.get(exc.code, 400),
            content={"error": exc.code, "detail": str(exc)},
        )

    @app.post("/api/v1/sessions")
    async def create_session(body: dict):
        sess = store.create_session(str(body.get("annotator_id", "")))
        return {"session_id": sess.session_id, "annotator_id": sess.annotator_id}

    @app.get("/api/v1/sessions/{session_id}/next")
    async def next_item(session_id: str):
        item = store.next_item(session_id)
        if item is None:
            return {"exhausted": True}
        return {"exhausted": False, "item": item.to_dict()}

    @app.post("/api/v1/sessions/{session_id}/votes")
    async def submit_vote(session_id: str, body: dict):
        return store.submit_vote(
            session_id,
            record_id=str(body.get("record_id", "")),
            object_surface=str(body.get("object_surface", "")),
            label=str(body.get("label", "")),
            correction=bool(body.get("correction", False)),
        )

    @app.get("/api/v1/progress")
    async def progress():
        return store.progress()

    @app.get("/api/v1/agreement")
    async def agreement():
        return store.agreement()

    @app.get("/api/v1/export")
    async def export():
        return {"records": [e.to_dict() for e in store.export()]}

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    return app
