"""Event-sourced annotation service: append-only log, pure state fold, HTTP API."""

from .app import app_from_env, create_app
from .events import (
    CLIP_REGISTERED,
    EVENT_KINDS,
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
from .llm import LLMClient, LLMConfig, UpstreamError
from .store import (
    LEASE_SECONDS,
    REFINEMENT,
    RESPONSES_REQUIRED,
    VALIDATION,
    EventStore,
    ServiceState,
    StoreError,
    refinement_task_id,
    replay,
    validation_task_id,
)

__all__ = [
    "CLIP_REGISTERED",
    "EVENT_KINDS",
    "Event",
    "EventLogError",
    "EventStore",
    "LEASE_SECONDS",
    "LLMClient",
    "LLMConfig",
    "MERGE_COMPLETED",
    "OVERRIDE_APPLIED",
    "RECOLLECT_COMPLETED",
    "REFINEMENT",
    "RESPONSES_REQUIRED",
    "RESPONSE_SUBMITTED",
    "ServiceState",
    "StoreError",
    "TASK_CLAIMED",
    "TASK_CREATED",
    "UpstreamError",
    "VALIDATION",
    "VERBNOUN_CORRECTION",
    "app_from_env",
    "create_app",
    "event_from_line",
    "refinement_task_id",
    "replay",
    "validation_task_id",
]
