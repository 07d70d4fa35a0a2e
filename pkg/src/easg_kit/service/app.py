"""HTTP API for the annotation pipeline.

Every write endpoint funnels through ``EventStore.transact``: checks run
against current state, events are emitted last, and the response leaves
only after the log is fsynced. Annotators stay independent: task reads
never expose other annotators' submissions, only counts.

Error classes: 404 unknown resource, 409 claim/sequence conflicts, 422
invalid submissions (graph violations come back as the validation
report), 502 upstream LLM failure with retry metadata.
"""

from __future__ import annotations

import os
from pathlib import Path

from fastapi import Body, FastAPI, HTTPException, Query, Response

from ..consensus import AnnotatorGraph, ConsensusError, detect_disagreements, merge
from ..core import Taxonomy, default_taxonomy, validate_graph
from ..evaluation import anticipation_topk
from ..formats import (
    PromptError,
    PromptMode,
    answer_from_jsonable,
    answer_to_jsonable,
    build_anticipation_prompt,
    build_summarization_prompt,
    graph_from_jsonable,
    graph_to_jsonable,
    override_from_jsonable,
    override_to_jsonable,
    parse_action_predictions,
    question_to_jsonable,
)
from ..temporal import TemporalError, recollect
from .events import (
    CLIP_REGISTERED,
    MERGE_COMPLETED,
    OVERRIDE_APPLIED,
    RECOLLECT_COMPLETED,
    RESPONSE_SUBMITTED,
    TASK_CLAIMED,
    TASK_CREATED,
    VERBNOUN_CORRECTION,
)
from .llm import LLMClient, LLMConfig, UpstreamError
from .store import (
    LEASE_SECONDS,
    REFINEMENT,
    VALIDATION,
    EventStore,
    refinement_task_id,
    validation_task_id,
)

FRAME_STAGES = ("pre", "pnr", "post")


def _error(status: int, error: str, **extra) -> HTTPException:
    return HTTPException(status_code=status, detail={"error": error, **extra})


def _parse_graph(doc, *, what: str = "graph"):
    if not isinstance(doc, dict):
        raise _error(422, "malformed-graph", message=f"{what} must be an object")
    try:
        return graph_from_jsonable(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise _error(422, "malformed-graph", message=f"{what}: {exc}") from exc


def _task_view(state, task: dict, now: float) -> dict:
    return {
        "task_id": task["task_id"],
        "kind": task["kind"],
        "clip_id": task["clip_id"],
        "timestep": task["timestep"],
        "payload": task["payload"],
        "required": task["required"],
        "responses": len(task["responses"]),
        "responded": sorted(state.responded(task)),
        "state": state.task_state(task, now),
        "claim": task["claim"],
        "review": task["review"],
    }


def create_app(
    store: EventStore,
    llm: LLMClient | None = None,
    *,
    taxonomy: Taxonomy | None = None,
    lease_seconds: float = LEASE_SECONDS,
    distinct_validators: bool = False,
) -> FastAPI:
    tax = taxonomy if taxonomy is not None else default_taxonomy()
    app = FastAPI(title="easg annotation service")

    def now() -> float:
        return float(store.clock())

    def get_clip(state, clip_id: str) -> dict:
        clip = state.clips.get(clip_id)
        if clip is None:
            raise _error(404, "unknown-clip", clip_id=clip_id)
        return clip

    def get_task(state, task_id: str) -> dict:
        task = state.tasks.get(task_id)
        if task is None:
            raise _error(404, "unknown-task", task_id=task_id)
        return task

    def clip_graphs(clip: dict) -> list:
        return [graph_from_jsonable(g) for g in clip["graphs"]]

    @app.get("/taxonomy")
    def get_taxonomy() -> dict:
        return {
            "verbs": list(tax.verbs),
            "nouns": list(tax.nouns),
            "relations": list(tax.relations),
        }

    @app.post("/clips", status_code=201)
    def register_clip(body: dict = Body(...)) -> dict:
        clip_id = body.get("clip_id")
        if not isinstance(clip_id, str) or not clip_id:
            raise _error(422, "bad-request", message="clip_id must be a non-empty string")
        scenario = body.get("scenario", "")
        split = body.get("split", "train")
        if split not in ("train", "val"):
            raise _error(422, "bad-request", message="split must be train or val")
        raw_graphs = body.get("graphs")
        if not isinstance(raw_graphs, list) or not raw_graphs:
            raise _error(422, "bad-request", message="graphs must be a non-empty list")
        narrations = body.get("narrations", [])
        if narrations and len(narrations) != len(raw_graphs):
            raise _error(422, "bad-request", message="need one narration per timestep")

        graphs = []
        for i, doc in enumerate(raw_graphs):
            g = _parse_graph(doc, what=f"graphs[{i}]")
            if g.clip_id != clip_id:
                raise _error(
                    422, "bad-request",
                    message=f"graphs[{i}] belongs to clip {g.clip_id!r}",
                )
            if g.timestep != i + 1:
                raise _error(
                    422, "bad-request",
                    message=f"graphs[{i}] has timestep {g.timestep}, expected {i + 1}",
                )
            report = validate_graph(g, tax)
            if not report.ok:
                raise HTTPException(
                    status_code=422,
                    detail={"error": "invalid-graph", "timestep": g.timestep,
                            "report": report.to_jsonable()},
                )
            graphs.append(g)

        def register(state, emit):
            if clip_id in state.clips:
                raise _error(409, "clip-exists", clip_id=clip_id)
            emit(CLIP_REGISTERED, {
                "clip_id": clip_id,
                "scenario": scenario,
                "split": split,
                "graphs": [graph_to_jsonable(g) for g in graphs],
                "narrations": list(narrations),
                "summary": body.get("summary"),
            })
            task_ids = []
            for g in graphs:
                task_id = refinement_task_id(clip_id, g.timestep)
                doc = graph_to_jsonable(g)
                emit(TASK_CREATED, {
                    "task_id": task_id,
                    "kind": REFINEMENT,
                    "clip_id": clip_id,
                    "timestep": g.timestep,
                    "payload": {"graph": doc, "frames": doc["frames"]},
                })
                task_ids.append(task_id)
            return {"clip_id": clip_id, "tasks": task_ids}

        return store.transact(register)

    @app.get("/clips/{clip_id}/graphs")
    def read_graphs(clip_id: str) -> dict:
        def read(state):
            clip = get_clip(state, clip_id)
            return {
                "clip_id": clip_id,
                "scenario": clip["scenario"],
                "split": clip["split"],
                "graphs": clip["graphs"],
                "narrations": clip["narrations"],
                "summary": clip["summary"],
                "merged": state.merged.get(clip_id),
                "recollected": state.recollected.get(clip_id),
            }

        return store.read(read)

    @app.get("/clips/{clip_id}/frames/{stage}")
    def read_frames(clip_id: str, stage: str) -> dict:
        if stage not in FRAME_STAGES:
            raise _error(422, "bad-request", message=f"stage must be one of {FRAME_STAGES}")

        def read(state):
            clip = get_clip(state, clip_id)
            frames = [
                {"timestep": doc["timestep"], **doc["frames"][stage]}
                for doc in clip["graphs"]
            ]
            return {"clip_id": clip_id, "stage": stage, "frames": frames}

        return store.read(read)

    @app.get("/tasks/next")
    def next_task(
        kind: str = Query(...), annotator: str = Query(...)
    ):
        if kind not in (REFINEMENT, VALIDATION):
            raise _error(422, "bad-request", message="kind must be refinement or validation")
        if not annotator:
            raise _error(422, "bad-request", message="annotator must be non-empty")

        def claim(state, emit):
            t = now()
            for task_id in sorted(
                state.tasks,
                key=lambda tid: (
                    state.tasks[tid]["clip_id"],
                    state.tasks[tid]["timestep"],
                    tid,
                ),
            ):
                task = state.tasks[task_id]
                if task["kind"] != kind or task["review"]:
                    continue
                if state.task_state(task, t) == "done":
                    continue
                if annotator in state.responded(task):
                    continue
                if (
                    distinct_validators
                    and kind == VALIDATION
                    and annotator in state.refiners(task["clip_id"], task["timestep"])
                ):
                    continue
                claim = task["claim"]
                if claim is not None and claim["expires"] > t and claim["annotator"] != annotator:
                    continue
                emit(TASK_CLAIMED, {
                    "task_id": task_id,
                    "annotator": annotator,
                    "lease_seconds": lease_seconds,
                })
                return _task_view(state, task, t)
            return None

        view = store.transact(claim)
        if view is None:
            return Response(status_code=204)
        return view

    @app.get("/tasks/{task_id}")
    def read_task(task_id: str) -> dict:
        return store.read(lambda state: _task_view(state, get_task(state, task_id), now()))

    @app.post("/tasks/{task_id}/response")
    def submit_response(task_id: str, body: dict = Body(...)) -> dict:
        annotator = body.get("annotator")
        if not isinstance(annotator, str) or not annotator:
            raise _error(422, "bad-request", message="annotator must be a non-empty string")

        def submit(state, emit):
            t = now()
            task = get_task(state, task_id)
            if state.task_state(task, t) == "done":
                raise _error(409, "task-complete", task_id=task_id)
            if annotator in state.responded(task):
                raise _error(409, "already-answered", task_id=task_id)
            claim = task["claim"]
            if claim is None or claim["expires"] <= t:
                raise _error(409, "no-active-lease", task_id=task_id)
            if claim["annotator"] != annotator:
                raise _error(409, "claimed-by-other", task_id=task_id)

            if task["kind"] == REFINEMENT:
                data = _check_refinement(task, body)
            else:
                data = _check_validation(task, body)
            emit(RESPONSE_SUBMITTED, {"task_id": task_id, "annotator": annotator, **data})

            if task["kind"] == REFINEMENT and len(task["responses"]) == task["required"]:
                _spawn_validation(state, emit, task)
            return _task_view(state, task, t)

        return store.transact(submit)

    def _check_refinement(task: dict, body: dict) -> dict:
        graph = _parse_graph(body.get("graph"))
        if graph.clip_id != task["clip_id"] or graph.timestep != task["timestep"]:
            raise _error(
                422, "bad-request",
                message="graph clip or timestep does not match the task",
            )
        report = validate_graph(graph, tax)
        if not report.ok:
            raise HTTPException(
                status_code=422,
                detail={"error": "invalid-graph", "report": report.to_jsonable()},
            )
        return {"graph": graph_to_jsonable(graph)}

    def _check_validation(task: dict, body: dict) -> dict:
        raw = body.get("answers")
        if not isinstance(raw, list):
            raise _error(422, "bad-request", message="answers must be a list")
        questions = {q["question_id"]: q for q in task["payload"]["questions"]}
        seen = {}
        for i, doc in enumerate(raw):
            if not isinstance(doc, dict):
                raise _error(422, "bad-request", message=f"answers[{i}] must be an object")
            qid = doc.get("question_id")
            if qid not in questions:
                raise _error(422, "unknown-question", question_id=qid)
            if qid in seen:
                raise _error(422, "duplicate-answer", question_id=qid)
            choice = doc.get("choice")
            if choice not in questions[qid]["options"]:
                raise _error(
                    422, "bad-choice",
                    question_id=qid, choice=choice,
                    options=questions[qid]["options"],
                )
            seen[qid] = {
                "question_id": qid,
                "choice": choice,
                "respondent_id": body["annotator"],
                "free_text": doc.get("free_text"),
            }
        missing = sorted(set(questions) - set(seen))
        if missing:
            raise _error(422, "unanswered-questions", question_ids=missing)
        return {"answers": [seen[qid] for qid in sorted(seen)]}

    def _spawn_validation(state, emit, task: dict) -> None:
        trio = [
            AnnotatorGraph(r["annotator"], graph_from_jsonable(r["graph"]))
            for r in task["responses"]
        ]
        questions = detect_disagreements(*trio)
        if not questions:
            return
        emit(TASK_CREATED, {
            "task_id": validation_task_id(task["clip_id"], task["timestep"]),
            "kind": VALIDATION,
            "clip_id": task["clip_id"],
            "timestep": task["timestep"],
            "payload": {"questions": [question_to_jsonable(q) for q in questions]},
        })

    @app.post("/clips/{clip_id}/verbnoun-correction")
    def verbnoun_correction(clip_id: str, body: dict = Body(...)) -> dict:
        timestep = body.get("timestep")
        verb = body.get("verb")
        noun = body.get("noun")
        annotator = body.get("annotator")
        if not isinstance(timestep, int):
            raise _error(422, "bad-request", message="timestep must be an integer")
        if not isinstance(annotator, str) or not annotator:
            raise _error(422, "bad-request", message="annotator must be a non-empty string")
        if verb not in tax.verbs:
            raise _error(422, "bad-request", message=f"unknown verb {verb!r}")
        if noun not in tax.nouns:
            raise _error(422, "bad-request", message=f"unknown noun {noun!r}")

        def record(state, emit):
            clip = get_clip(state, clip_id)
            if not 1 <= timestep <= len(clip["graphs"]):
                raise _error(422, "bad-request", message=f"timestep {timestep} out of range")
            emit(VERBNOUN_CORRECTION, {
                "clip_id": clip_id,
                "timestep": timestep,
                "verb": verb,
                "noun": noun,
                "annotator": annotator,
            })
            return {
                "status": "recorded",
                "task_id": refinement_task_id(clip_id, timestep),
                "review": True,
            }

        return store.transact(record)

    @app.post("/clips/{clip_id}/override")
    def apply_override(clip_id: str, body: dict = Body(...)) -> dict:
        try:
            override = override_from_jsonable(
                {"groups": body.get("groups", []), "splits": body.get("splits", [])}
            )
        except (TypeError, ValueError, IndexError) as exc:
            raise _error(422, "bad-request", message=f"malformed override: {exc}") from exc

        def record(state, emit):
            get_clip(state, clip_id)
            emit(OVERRIDE_APPLIED, {
                "clip_id": clip_id,
                "override": override_to_jsonable(override),
            })
            return {"clip_id": clip_id, "override": state.overrides[clip_id]}

        return store.transact(record)

    @app.post("/clips/{clip_id}/merge")
    def merge_clip(clip_id: str) -> dict:
        def run(state, emit):
            clip = get_clip(state, clip_id)
            if clip_id in state.merged:
                return {"clip_id": clip_id, "graphs": state.merged[clip_id], "created": False}
            graphs_out = []
            for timestep in range(1, len(clip["graphs"]) + 1):
                ref = state.tasks[refinement_task_id(clip_id, timestep)]
                if len(ref["responses"]) < ref["required"]:
                    raise _error(
                        409, "incomplete",
                        task_id=ref["task_id"],
                        responses=len(ref["responses"]),
                        required=ref["required"],
                    )
                answers = []
                val = state.tasks.get(validation_task_id(clip_id, timestep))
                if val is not None:
                    if len(val["responses"]) < val["required"]:
                        raise _error(409, "incomplete", task_id=val["task_id"],
                                     responses=len(val["responses"]),
                                     required=val["required"])
                    answers = [
                        answer_from_jsonable(a) for a in val["responses"][0]["answers"]
                    ]
                trio = [
                    AnnotatorGraph(r["annotator"], graph_from_jsonable(r["graph"]))
                    for r in ref["responses"]
                ]
                try:
                    consensus = merge(trio[0], trio[1], trio[2], answers=answers)
                except ConsensusError as exc:
                    raise _error(422, "merge-failed", timestep=timestep, message=str(exc))
                graphs_out.append(graph_to_jsonable(consensus))
            emit(MERGE_COMPLETED, {"clip_id": clip_id, "graphs": graphs_out})
            return {"clip_id": clip_id, "graphs": graphs_out, "created": True}

        return store.transact(run)

    @app.post("/clips/{clip_id}/recollect")
    def recollect_clip(clip_id: str) -> dict:
        def run(state, emit):
            get_clip(state, clip_id)
            if clip_id not in state.merged:
                raise _error(409, "not-merged", clip_id=clip_id)
            graphs = [graph_from_jsonable(g) for g in state.merged[clip_id]]
            override = None
            if clip_id in state.overrides:
                override = override_from_jsonable(state.overrides[clip_id])
            try:
                dynamic = recollect(graphs, override)
            except TemporalError as exc:
                raise _error(422, "recollect-failed", message=str(exc))
            graphs_out = [graph_to_jsonable(g) for g in dynamic.graphs]
            emit(RECOLLECT_COMPLETED, {"clip_id": clip_id, "graphs": graphs_out})
            return {"clip_id": clip_id, "graphs": graphs_out}

        return store.transact(run)

    def _require_llm() -> LLMClient:
        if llm is None:
            raise _error(502, "llm-not-configured",
                         message="no LLM backend; set EASG_LLM_URL and restart")
        return llm

    def _completion(prompt) -> str:
        _require_llm()
        try:
            return llm.complete(prompt.system_text, prompt.user_text)
        except UpstreamError as exc:
            raise HTTPException(
                status_code=502,
                detail={
                    "error": "llm-upstream",
                    "message": str(exc),
                    "attempts": exc.attempts,
                    "retry_after": exc.retry_after,
                    "status": exc.status,
                },
            ) from exc

    @app.post("/llm/anticipate")
    def llm_anticipate(body: dict = Body(...)) -> dict:
        _require_llm()
        clip_id = body.get("clip_id")
        mode = body.get("mode", "easg")
        clip = store.read(lambda state: get_clip(state, clip_id))
        try:
            prompt = build_anticipation_prompt(clip_graphs(clip), PromptMode(mode))
        except (PromptError, ValueError) as exc:
            raise _error(422, "bad-prompt", message=str(exc)) from exc
        completion = _completion(prompt)
        prediction = parse_action_predictions(completion)
        result = {
            "clip_id": clip_id,
            "mode": mode,
            "prompt": {"system": prompt.system_text, "user": prompt.user_text},
            "completion": completion,
            "predictions": [list(pair) for pair in prediction.pairs],
        }
        gt = body.get("gt")
        if gt is not None:
            truth = (gt[0], gt[1])
            result["hits"] = {
                f"top{k}": dict(
                    zip(("verb", "noun", "action"), anticipation_topk(prediction, truth, k))
                )
                for k in (1, 5)
            }
        return result

    @app.post("/llm/summarize")
    def llm_summarize(body: dict = Body(...)) -> dict:
        _require_llm()
        clip_id = body.get("clip_id")
        mode = body.get("mode", "easg")
        clip = store.read(lambda state: get_clip(state, clip_id))
        try:
            prompt_mode = PromptMode(mode)
            if prompt_mode is PromptMode.NARRATION:
                sequence = clip["narrations"]
            else:
                sequence = clip_graphs(clip)
            prompt = build_summarization_prompt(sequence, prompt_mode)
        except (PromptError, ValueError) as exc:
            raise _error(422, "bad-prompt", message=str(exc)) from exc
        completion = _completion(prompt)
        return {
            "clip_id": clip_id,
            "mode": mode,
            "prompt": {"system": prompt.system_text, "user": prompt.user_text},
            "summary": completion,
            "reference": clip["summary"],
        }

    return app


def app_from_env(env=os.environ) -> FastAPI:
    """App wired from the environment: data dir, lease, LLM settings."""
    data_dir = Path(env.get("EASG_DATA_DIR", "./easg-service-data"))
    store = EventStore(data_dir / "events.ndjson")
    config = LLMConfig.from_env(env)
    llm = LLMClient(config) if config is not None else None
    lease = float(env.get("EASG_LEASE_SECONDS", str(LEASE_SECONDS)))
    distinct = env.get("EASG_DISTINCT_VALIDATORS", "") == "1"
    return create_app(store, llm, lease_seconds=lease, distinct_validators=distinct)
