"""Event records for the annotation backend.

Every state change is one immutable event; the NDJSON line form is the
durable representation and the only thing replay ever reads. Event data
must stay JSON-native so a round trip through the log is exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

CLIP_REGISTERED = "clip_registered"
TASK_CREATED = "task_created"
TASK_CLAIMED = "task_claimed"
RESPONSE_SUBMITTED = "response_submitted"
VERBNOUN_CORRECTION = "verbnoun_correction"
MERGE_COMPLETED = "merge_completed"
OVERRIDE_APPLIED = "override_applied"
RECOLLECT_COMPLETED = "recollect_completed"

EVENT_KINDS = (
    CLIP_REGISTERED,
    TASK_CREATED,
    TASK_CLAIMED,
    RESPONSE_SUBMITTED,
    VERBNOUN_CORRECTION,
    MERGE_COMPLETED,
    OVERRIDE_APPLIED,
    RECOLLECT_COMPLETED,
)


class EventLogError(Exception):
    """The log file is unreadable, corrupt, or out of sequence."""


@dataclass(frozen=True)
class Event:
    seq: int
    ts: float
    kind: str
    data: dict

    def __post_init__(self) -> None:
        if self.seq < 1:
            raise EventLogError(f"event seq must start at 1, got {self.seq}")
        if self.kind not in EVENT_KINDS:
            raise EventLogError(f"unknown event kind {self.kind!r}")

    def to_line(self) -> str:
        return json.dumps(
            {"seq": self.seq, "ts": self.ts, "kind": self.kind, "data": self.data},
            sort_keys=True,
            ensure_ascii=False,
        )


def event_from_line(line: str, lineno: int = 0) -> Event:
    where = f" (line {lineno})" if lineno else ""
    try:
        doc = json.loads(line)
    except json.JSONDecodeError as exc:
        raise EventLogError(f"event log is not valid JSON{where}: {exc}") from exc
    if not isinstance(doc, dict):
        raise EventLogError(f"event record must be an object{where}")
    try:
        return Event(
            seq=int(doc["seq"]),
            ts=float(doc["ts"]),
            kind=doc["kind"],
            data=doc["data"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise EventLogError(f"malformed event record{where}: {exc}") from exc
