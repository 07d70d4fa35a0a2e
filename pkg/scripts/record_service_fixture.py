#!/usr/bin/env python3
"""Record the service pipeline fixture.

Drives a fresh service through register -> three refinements per timestep
-> validation questions -> answers -> merge -> override -> recollect with
a fixed fake clock, recording every request and response. The replay test
re-issues the requests against a fresh service and demands equal output,
so any behavior drift shows up as a diff against this file.

Regenerate with:  python3 scripts/record_service_fixture.py
"""

from __future__ import annotations

import json
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

from fastapi.testclient import TestClient  # noqa: E402

from easg_kit.formats import graph_to_jsonable  # noqa: E402
from easg_kit.service import EventStore, create_app  # noqa: E402

from service_helpers import (  # noqa: E402
    FakeClock,
    clip_a_seeds,
    pick_answers,
    register_body,
    simple_graph,
    table3_graph,
)

OUT = ROOT / "tests" / "fixtures" / "service_pipeline.json"


def refinement_graph(annotator: str, timestep: int):
    if timestep == 3:
        return table3_graph(annotator)
    if timestep == 1:
        return simple_graph("clip-a", 1, "open", "drawer")
    return simple_graph("clip-a", 2, "take", "bowl")


def main() -> None:
    store = EventStore(
        Path(tempfile.mkdtemp()) / "events.ndjson", clock=FakeClock()
    )
    client = TestClient(create_app(store, lease_seconds=1800.0))
    steps: list[dict] = []

    def call(method: str, path: str, *, params=None, body=None) -> dict | None:
        r = client.request(method, path, params=params, json=body)
        response = r.json() if r.content else None
        steps.append({
            "method": method,
            "path": path,
            "params": params,
            "body": body,
            "status": r.status_code,
            "response": response,
        })
        return response

    call("POST", "/clips", body=register_body(
        "clip-a", clip_a_seeds(),
        narrations=["opens a drawer", "takes a bowl", "takes the bowl"],
        summary="CW takes a bowl from the drawer.",
    ))
    # merging before anyone has responded must conflict
    call("POST", "/clips/clip-a/merge")

    for annotator in ("a1", "a2", "a3"):
        for timestep in (1, 2, 3):
            task = call("GET", "/tasks/next",
                        params={"kind": "refinement", "annotator": annotator})
            call("POST", f"/tasks/{task['task_id']}/response", body={
                "annotator": annotator,
                "graph": graph_to_jsonable(refinement_graph(annotator, timestep)),
            })

    # no refinement work left
    call("GET", "/tasks/next", params={"kind": "refinement", "annotator": "a4"})

    task = call("GET", "/tasks/next",
                params={"kind": "validation", "annotator": "val-1"})
    call("GET", f"/tasks/{task['task_id']}")
    call("POST", f"/tasks/{task['task_id']}/response", body={
        "annotator": "val-1",
        "answers": pick_answers(task["payload"]["questions"]),
    })

    call("POST", "/clips/clip-a/merge")
    call("POST", "/clips/clip-a/merge")  # idempotent
    call("GET", "/clips/clip-a/graphs")
    call("POST", "/clips/clip-a/recollect")
    call("POST", "/clips/clip-a/override",
         body={"splits": [[[2, "obj:0"], [3, "obj:0"]]]})
    call("POST", "/clips/clip-a/recollect")
    call("GET", "/clips/clip-a/frames/pnr")
    call("GET", "/tasks/ref:clip-a:3")

    fixture = {"lease_seconds": 1800.0, "clock": {"start": 1000.0, "step": 1.0},
               "steps": steps, "digest": store.digest()}
    store.close()

    OUT.write_text(json.dumps(fixture, indent=1, sort_keys=True,
                              ensure_ascii=False) + "\n", encoding="utf-8")
    print(f"wrote {OUT} ({OUT.stat().st_size} bytes, {len(steps)} steps)")


if __name__ == "__main__":
    main()
