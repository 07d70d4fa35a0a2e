"""Durable event store and the service state derived from it.

Persistence is a single append-only NDJSON file. All writes go through
``EventStore.transact``, which serializes writers, appends the new
events, and fsyncs before returning, so every acknowledged write
survives a crash. State is a pure fold over the log: ``ServiceState.apply``
consults nothing but the event itself (in particular, never the clock),
which is what makes replay reconstruct state byte-identically.

Handlers passed to ``transact`` must do every check BEFORE their first
``emit``: an event, once emitted, is already on disk and applied, and an
exception afterwards will not unwind it.
"""

from __future__ import annotations

import fcntl
import hashlib
import json
import os
import threading
import time
from pathlib import Path

from .events import (
    CLIP_REGISTERED,
    MERGE_COMPLETED,
    OVERRIDE_APPLIED,
    RECOLLECT_COMPLETED,
    RESPONSE_SUBMITTED,
    TASK_CLAIMED,
    TASK_CREATED,
    VERBNOUN_CORRECTION,
    Event,
    EventLogError,
    event_from_line,
)

LEASE_SECONDS = 30 * 60

REFINEMENT = "refinement"
VALIDATION = "validation"
RESPONSES_REQUIRED = {REFINEMENT: 3, VALIDATION: 1}


class StoreError(Exception):
    """The store cannot be opened (already locked, unwritable path)."""


def refinement_task_id(clip_id: str, timestep: int) -> str:
    return f"ref:{clip_id}:{timestep}"


def validation_task_id(clip_id: str, timestep: int) -> str:
    return f"val:{clip_id}:{timestep}"


class ServiceState:
    """Everything the service knows, folded from the event log.

    All values are JSON-native dicts/lists/scalars so the canonical
    snapshot (and therefore the digest) is trivially well-defined.
    """

    def __init__(self) -> None:
        self.clips: dict[str, dict] = {}
        self.tasks: dict[str, dict] = {}
        self.corrections: list[dict] = []
        self.overrides: dict[str, dict] = {}
        self.merged: dict[str, list] = {}
        self.recollected: dict[str, list] = {}
        self.last_seq = 0

    def apply(self, event: Event) -> None:
        if event.seq != self.last_seq + 1:
            raise EventLogError(
                f"event seq {event.seq} does not follow {self.last_seq}"
            )
        _HANDLERS[event.kind](self, event)
        self.last_seq = event.seq

    def _on_clip_registered(self, event: Event) -> None:
        data = event.data
        self.clips[data["clip_id"]] = {
            "clip_id": data["clip_id"],
            "scenario": data["scenario"],
            "split": data["split"],
            "graphs": data["graphs"],
            "narrations": data.get("narrations", []),
            "summary": data.get("summary"),
        }

    def _on_task_created(self, event: Event) -> None:
        data = event.data
        self.tasks[data["task_id"]] = {
            "task_id": data["task_id"],
            "kind": data["kind"],
            "clip_id": data["clip_id"],
            "timestep": data["timestep"],
            "payload": data["payload"],
            "required": RESPONSES_REQUIRED[data["kind"]],
            "responses": [],
            "claim": None,
            "review": False,
        }

    def _on_task_claimed(self, event: Event) -> None:
        data = event.data
        self.tasks[data["task_id"]]["claim"] = {
            "annotator": data["annotator"],
            "expires": event.ts + data["lease_seconds"],
        }

    def _on_response_submitted(self, event: Event) -> None:
        data = event.data
        task = self.tasks[data["task_id"]]
        record = {"annotator": data["annotator"], "ts": event.ts}
        if "graph" in data:
            record["graph"] = data["graph"]
        if "answers" in data:
            record["answers"] = data["answers"]
        task["responses"].append(record)
        task["claim"] = None

    def _on_verbnoun_correction(self, event: Event) -> None:
        data = event.data
        self.corrections.append(
            {
                "clip_id": data["clip_id"],
                "timestep": data["timestep"],
                "verb": data["verb"],
                "noun": data["noun"],
                "annotator": data["annotator"],
                "ts": event.ts,
            }
        )
        task = self.tasks.get(refinement_task_id(data["clip_id"], data["timestep"]))
        if task is not None:
            task["review"] = True

    def _on_merge_completed(self, event: Event) -> None:
        self.merged[event.data["clip_id"]] = event.data["graphs"]

    def _on_override_applied(self, event: Event) -> None:
        self.overrides[event.data["clip_id"]] = event.data["override"]

    def _on_recollect_completed(self, event: Event) -> None:
        self.recollected[event.data["clip_id"]] = event.data["graphs"]

    # -- read helpers ----------------------------------------------------

    def task_state(self, task: dict, now: float) -> str:
        if len(task["responses"]) >= task["required"]:
            return "done"
        claim = task["claim"]
        if claim is not None and claim["expires"] > now:
            return "claimed"
        return "open"

    def responded(self, task: dict) -> set[str]:
        return {r["annotator"] for r in task["responses"]}

    def refiners(self, clip_id: str, timestep: int) -> set[str]:
        task = self.tasks.get(refinement_task_id(clip_id, timestep))
        return self.responded(task) if task else set()

    def snapshot(self) -> dict:
        return {
            "clips": self.clips,
            "tasks": self.tasks,
            "corrections": self.corrections,
            "overrides": self.overrides,
            "merged": self.merged,
            "recollected": self.recollected,
            "last_seq": self.last_seq,
        }

    def canonical(self) -> str:
        return json.dumps(self.snapshot(), sort_keys=True, ensure_ascii=False)

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()


_HANDLERS = {
    CLIP_REGISTERED: ServiceState._on_clip_registered,
    TASK_CREATED: ServiceState._on_task_created,
    TASK_CLAIMED: ServiceState._on_task_claimed,
    RESPONSE_SUBMITTED: ServiceState._on_response_submitted,
    VERBNOUN_CORRECTION: ServiceState._on_verbnoun_correction,
    MERGE_COMPLETED: ServiceState._on_merge_completed,
    OVERRIDE_APPLIED: ServiceState._on_override_applied,
    RECOLLECT_COMPLETED: ServiceState._on_recollect_completed,
}


def replay(path) -> ServiceState:
    """Fold a log file into a fresh state without opening it for writing."""
    state = ServiceState()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.strip():
                state.apply(event_from_line(line, lineno))
    return state


class EventStore:
    """Single-writer append log with the derived state alongside.

    The log file carries an exclusive advisory lock for the lifetime of
    the store, so two processes cannot interleave writes. ``clock`` is
    injectable for tests; it only ever stamps events and drives lease
    arithmetic at the edges, never the fold itself.
    """

    def __init__(self, path, *, clock=time.time) -> None:
        self.path = Path(path)
        self.clock = clock
        self._lock = threading.Lock()
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.state = ServiceState()
        if self.path.exists():
            self.state = replay(self.path)
        self._file = open(self.path, "a", encoding="utf-8")
        try:
            fcntl.flock(self._file.fileno(), fcntl.LOCK_EX | fcntl.LOCK_NB)
        except OSError as exc:
            self._file.close()
            raise StoreError(f"event log {self.path} is locked by another writer") from exc
        self._seq = self.state.last_seq

    def transact(self, fn):
        """Run ``fn(state, emit)`` under the writer lock.

        ``emit(kind, data)`` appends one event and applies it so later
        reads inside ``fn`` see its effect. Everything emitted is flushed
        and fsynced before ``transact`` returns.
        """
        with self._lock:
            emitted = False

            def emit(kind: str, data: dict) -> Event:
                nonlocal emitted
                event = Event(self._seq + 1, float(self.clock()), kind, data)
                self._file.write(event.to_line() + "\n")
                self.state.apply(event)
                self._seq = event.seq
                emitted = True
                return event

            try:
                return fn(self.state, emit)
            finally:
                if emitted:
                    self._file.flush()
                    os.fsync(self._file.fileno())

    def read(self, fn):
        """Run ``fn(state)`` under the lock and return its result."""
        with self._lock:
            return fn(self.state)

    def digest(self) -> str:
        return self.read(lambda state: state.digest())

    def close(self) -> None:
        self._file.close()

    def __enter__(self) -> "EventStore":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
