"""Command line front end: ``easg``.

Each subcommand is a thin shell over one library call; no graph or metric
logic lives here. Output is deterministic for fixed inputs and seeds, and
every table is also available as JSON via ``--json``.

Exit codes by failure class:
    2  cannot read or write a file
    3  a document is malformed (bad JSON, schema or record-format mismatch)
    4  content is well-formed but breaks an invariant or precondition
    5  the upstream LLM call failed
"""

from __future__ import annotations

import functools
import json

import click

from .consensus import AnnotatorGraph, ConsensusError, merge as merge_graphs
from .core import GraphOpError, TaxonomyError, validate_graph
from .evaluation import (
    PredictionError,
    SlotAlignmentError,
    Task,
    anticipation_accuracy,
    bleu,
    cider,
    compute_stats,
    evaluate_generation,
    load_predictions,
    random_baseline,
    render_recall_table,
    render_stats_table,
    rouge_l,
    rouge_n,
)
from .formats import (
    ActionPrediction,
    DatasetValidationError,
    PromptError,
    PromptMode,
    SchemaError,
    answer_from_jsonable,
    build_anticipation_prompt,
    build_summarization_prompt,
    graph_from_jsonable,
    graph_to_jsonable,
    load_dataset,
    override_from_jsonable,
    parse_action_predictions,
)
from .service.llm import LLMClient, LLMConfig, UpstreamError
from .temporal import TemporalError, recollect as recollect_graphs

EXIT_IO = 2
EXIT_SCHEMA = 3
EXIT_VALIDATION = 4
EXIT_UPSTREAM = 5


class CliError(click.ClickException):
    """ClickException with the exit code of its failure class."""

    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


def _fail(code: int, message: str) -> None:
    raise CliError(message, code)


def guarded(fn):
    """Map library failures onto the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except click.ClickException:
            raise
        except OSError as exc:
            _fail(EXIT_IO, str(exc))
        except json.JSONDecodeError as exc:
            _fail(EXIT_SCHEMA, f"malformed JSON: {exc}")
        except (SchemaError, PredictionError) as exc:
            _fail(EXIT_SCHEMA, str(exc))
        except (
            DatasetValidationError,
            GraphOpError,
            TaxonomyError,
            ConsensusError,
            TemporalError,
            PromptError,
            SlotAlignmentError,
        ) as exc:
            _fail(EXIT_VALIDATION, str(exc))
        except UpstreamError as exc:
            _fail(EXIT_UPSTREAM, str(exc))

    return wrapper


def _read_json(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _echo_json(doc) -> None:
    click.echo(json.dumps(doc, indent=1, sort_keys=True, ensure_ascii=False))


def _bundle_field(doc: dict, key: str, kind: type, where: str):
    value = doc.get(key)
    if not isinstance(value, kind):
        _fail(EXIT_SCHEMA, f"{where}: field {key!r} must be {kind.__name__}")
    return value


def _parse_graph(doc, where: str):
    try:
        return graph_from_jsonable(doc)
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        _fail(EXIT_SCHEMA, f"{where}: malformed graph: {exc!r}")


def _parse_answer(doc, where: str):
    try:
        return answer_from_jsonable(doc)
    except (KeyError, TypeError, AttributeError) as exc:
        _fail(EXIT_SCHEMA, f"{where}: malformed answer: {exc!r}")


def _parse_ks(text: str) -> tuple[int, ...]:
    try:
        ks = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise click.BadParameter(f"k values must be integers, got {text!r}")
    if not ks or any(k < 1 for k in ks):
        raise click.BadParameter("k values must be positive")
    return ks


TASK_CHOICES = tuple(t.value for t in Task) + ("all",)


def _parse_tasks(name: str) -> tuple[Task, ...]:
    if name == "all":
        return tuple(Task)
    return (Task(name),)


@click.group()
def cli() -> None:
    """Egocentric action scene graph toolkit."""


@cli.command()
@click.argument("dataset", type=click.Path())
@click.option("--json", "as_json", is_flag=True, help="Emit the report as JSON.")
@click.pass_context
@guarded
def validate(ctx: click.Context, dataset: str, as_json: bool) -> None:
    """Validate DATASET: schema, then every graph's invariants."""
    ds = load_dataset(dataset)
    violations: list[dict] = []
    warnings: list[dict] = []
    graph_count = 0
    for clip in ds.clips:
        for g in clip.dynamic.graphs:
            graph_count += 1
            report = validate_graph(g, ds.taxonomy)
            for bucket, items in (
                (violations, report.violations),
                (warnings, report.warnings),
            ):
                bucket.extend(
                    {
                        "clip_id": clip.clip_id,
                        "timestep": g.timestep,
                        "code": v.code,
                        "message": v.message,
                        "subject": v.subject,
                    }
                    for v in items
                )
    ok = not violations
    if as_json:
        _echo_json({
            "ok": ok,
            "clips": len(ds.clips),
            "graphs": graph_count,
            "violations": violations,
            "warnings": warnings,
        })
    else:
        for kind, rows in (("violation", violations), ("warning", warnings)):
            for row in rows:
                click.echo(
                    f"{kind}: {row['clip_id']} t{row['timestep']} "
                    f"{row['code']}: {row['message']}"
                )
        click.echo(
            f"{'ok' if ok else 'invalid'}: {len(ds.clips)} clips, "
            f"{graph_count} graphs, {len(violations)} violations, "
            f"{len(warnings)} warnings"
        )
    if not ok:
        ctx.exit(EXIT_VALIDATION)


@cli.command("merge")
@click.argument("clip_file", type=click.Path())
@guarded
def merge_cmd(clip_file: str) -> None:
    """Merge three annotators' refinements of one clip into consensus graphs.

    CLIP_FILE holds {"clip_id", "annotators": [{"annotator_id", "graphs"}
    x3], "answers": [...]}; answers are matched to their timestep by
    question id. Prints {"clip_id", "graphs"}.
    """
    doc = _read_json(clip_file)
    if not isinstance(doc, dict):
        _fail(EXIT_SCHEMA, f"{clip_file}: expected an object")
    clip_id = _bundle_field(doc, "clip_id", str, clip_file)
    annotators = _bundle_field(doc, "annotators", list, clip_file)
    if len(annotators) != 3:
        _fail(EXIT_SCHEMA, f"{clip_file}: need exactly 3 annotators, got {len(annotators)}")
    trails = []
    for entry in annotators:
        if not isinstance(entry, dict):
            _fail(EXIT_SCHEMA, f"{clip_file}: annotator entries must be objects")
        annotator_id = _bundle_field(entry, "annotator_id", str, clip_file)
        graphs = [_parse_graph(g, clip_file)
                  for g in _bundle_field(entry, "graphs", list, clip_file)]
        trails.append((annotator_id, graphs))
    lengths = {len(graphs) for _, graphs in trails}
    if len(lengths) != 1:
        _fail(EXIT_SCHEMA, f"{clip_file}: annotators disagree on timestep count")
    answers = [_parse_answer(a, clip_file) for a in doc.get("answers", [])]

    merged = []
    for idx, timestep in enumerate(g.timestep for g in trails[0][1]):
        trio = [
            AnnotatorGraph(annotator_id, graphs[idx])
            for annotator_id, graphs in trails
        ]
        step_answers = [
            a for a in answers if a.question_id.startswith(f"{clip_id}:{timestep}:")
        ]
        merged.append(merge_graphs(trio[0], trio[1], trio[2], answers=step_answers))
    _echo_json({"clip_id": clip_id, "graphs": [graph_to_jsonable(g) for g in merged]})


@cli.command("recollect")
@click.argument("clip_file", type=click.Path())
@guarded
def recollect_cmd(clip_file: str) -> None:
    """Re-assign object instance indices across one clip's graphs.

    CLIP_FILE holds {"graphs": [...], "override": {...} or null}. Prints
    {"clip_id", "graphs"} with instance ids stable across timesteps.
    """
    doc = _read_json(clip_file)
    if not isinstance(doc, dict):
        _fail(EXIT_SCHEMA, f"{clip_file}: expected an object")
    graphs = [_parse_graph(g, clip_file)
              for g in _bundle_field(doc, "graphs", list, clip_file)]
    override = None
    if doc.get("override") is not None:
        raw = doc["override"]
        if not isinstance(raw, dict):
            _fail(EXIT_SCHEMA, f"{clip_file}: field 'override' must be an object")
        try:
            override = override_from_jsonable(
                {"groups": raw.get("groups", []), "splits": raw.get("splits", [])}
            )
        except TemporalError:
            raise
        except (TypeError, ValueError, IndexError) as exc:
            _fail(EXIT_SCHEMA, f"{clip_file}: malformed override: {exc!r}")
    dynamic = recollect_graphs(graphs, override)
    _echo_json({
        "clip_id": dynamic.clip_id,
        "graphs": [graph_to_jsonable(g) for g in dynamic.graphs],
    })


@cli.command()
@click.argument("dataset", type=click.Path())
@click.option("--json", "as_json", is_flag=True, help="Emit the report as JSON.")
@guarded
def stats(dataset: str, as_json: bool) -> None:
    """Dataset statistics: sizes, durations, class counts, boxes."""
    report = compute_stats(load_dataset(dataset))
    if as_json:
        _echo_json(report.to_jsonable())
    else:
        click.echo(render_stats_table(report))


@cli.group()
def eval() -> None:
    """Evaluate generation, anticipation, or summarization outputs."""


@eval.command("generation")
@click.argument("dataset", type=click.Path())
@click.argument("predictions", type=click.Path())
@click.option("--task", type=click.Choice(TASK_CHOICES), default="all",
              show_default=True, help="Scene graph task to score.")
@click.option("--k", "ks_text", default="10,20,50", show_default=True,
              help="Comma-separated Recall@K cutoffs.")
@click.option("--include-direct-object/--no-direct-object", default=True,
              show_default=True, help="Score the direct-object edge too.")
@click.option("--micro", is_flag=True, help="Micro-average over edges.")
@click.option("--json", "as_json", is_flag=True, help="Emit the report as JSON.")
@guarded
def eval_generation(dataset: str, predictions: str, task: str, ks_text: str,
                    include_direct_object: bool, micro: bool, as_json: bool) -> None:
    """Recall@K of PREDICTIONS against the graphs in DATASET."""
    ks = _parse_ks(ks_text)
    ds = load_dataset(dataset)
    preds = load_predictions(predictions)
    by_key = {(p.clip_id, p.timestep): p for p in preds}
    pairs = []
    for clip in ds.clips:
        for g in clip.dynamic.graphs:
            pred = by_key.pop((clip.clip_id, g.timestep), None)
            if pred is None:
                _fail(EXIT_VALIDATION,
                      f"no prediction for {clip.clip_id} t{g.timestep}")
            pairs.append((pred, g))
    if by_key:
        stray = sorted(by_key)[0]
        _fail(EXIT_VALIDATION,
              f"prediction for unknown graph {stray[0]} t{stray[1]}")
    report = evaluate_generation(
        pairs,
        tasks=_parse_tasks(task),
        ks=ks,
        include_direct_object=include_direct_object,
        taxonomy=ds.taxonomy,
        micro=micro,
    )
    if as_json:
        _echo_json(report)
    else:
        click.echo(render_recall_table(report, ks))


@eval.command("anticipation")
@click.argument("gt", type=click.Path())
@click.argument("predictions", type=click.Path())
@click.option("--k", "ks_text", default="1,5", show_default=True,
              help="Comma-separated top-k cutoffs.")
@click.option("--json", "as_json", is_flag=True, help="Emit the report as JSON.")
@guarded
def eval_anticipation(gt: str, predictions: str, ks_text: str, as_json: bool) -> None:
    """Top-k verb/noun/action accuracy of PREDICTIONS against GT.

    GT is a JSON array of {"verb", "noun"}; PREDICTIONS is an index-aligned
    JSON array of {"pairs": [[verb, noun], ...]} or {"completion": text}.
    """
    ks = _parse_ks(ks_text)
    truths = _read_json(gt)
    raw_preds = _read_json(predictions)
    if not isinstance(truths, list) or not isinstance(raw_preds, list):
        _fail(EXIT_SCHEMA, "gt and predictions must be JSON arrays")
    if len(truths) != len(raw_preds):
        _fail(EXIT_SCHEMA,
              f"gt has {len(truths)} cases, predictions {len(raw_preds)}")
    cases = []
    for i, (t, p) in enumerate(zip(truths, raw_preds)):
        if not isinstance(t, dict) or "verb" not in t or "noun" not in t:
            _fail(EXIT_SCHEMA, f"gt[{i}] must be an object with verb and noun")
        if not isinstance(p, dict):
            _fail(EXIT_SCHEMA, f"predictions[{i}] must be an object")
        if "pairs" in p:
            try:
                pred = ActionPrediction(tuple((v, n) for v, n in p["pairs"]))
            except (TypeError, ValueError) as exc:
                _fail(EXIT_SCHEMA, f"predictions[{i}]: {exc}")
        elif "completion" in p:
            pred = parse_action_predictions(p["completion"])
        else:
            _fail(EXIT_SCHEMA, f"predictions[{i}] needs pairs or completion")
        cases.append((pred, (t["verb"], t["noun"])))
    report = {f"top{k}": anticipation_accuracy(cases, k) for k in ks}
    if as_json:
        _echo_json(report)
    else:
        header = f"{'':8}" + "".join(f"{col:>8}" for col in ("verb", "noun", "action"))
        lines = [header]
        for k in ks:
            row = report[f"top{k}"]
            lines.append(f"{f'top-{k}':8}" + "".join(
                f"{row[col] * 100:>8.1f}" for col in ("verb", "noun", "action")))
        click.echo("\n".join(lines))


@eval.command("summarization")
@click.argument("references", type=click.Path())
@click.argument("candidates", type=click.Path())
@click.option("--json", "as_json", is_flag=True, help="Emit the report as JSON.")
@guarded
def eval_summarization(references: str, candidates: str, as_json: bool) -> None:
    """BLEU, ROUGE, and CIDEr of CANDIDATES against REFERENCES.

    REFERENCES is a JSON array of reference lists (one list per clip);
    CANDIDATES is an index-aligned JSON array of summary strings.
    """
    refs = _read_json(references)
    cands = _read_json(candidates)
    if not isinstance(refs, list) or not isinstance(cands, list):
        _fail(EXIT_SCHEMA, "references and candidates must be JSON arrays")
    if len(refs) != len(cands):
        _fail(EXIT_SCHEMA,
              f"references has {len(refs)} entries, candidates {len(cands)}")
    if not cands:
        _fail(EXIT_SCHEMA, "need at least one candidate")
    for i, (r, c) in enumerate(zip(refs, cands)):
        if not isinstance(r, list) or not all(isinstance(x, str) for x in r) or not r:
            _fail(EXIT_SCHEMA, f"references[{i}] must be a non-empty string array")
        if not isinstance(c, str):
            _fail(EXIT_SCHEMA, f"candidates[{i}] must be a string")
    count = len(cands)
    report = {
        "cases": count,
        "bleu_4": sum(bleu(c, r) for c, r in zip(cands, refs)) / count,
        "rouge_1": sum(rouge_n(c, r, 1) for c, r in zip(cands, refs)) / count,
        "rouge_2": sum(rouge_n(c, r, 2) for c, r in zip(cands, refs)) / count,
        "rouge_l": sum(rouge_l(c, r) for c, r in zip(cands, refs)) / count,
        "cider": cider(cands, refs),
    }
    if as_json:
        _echo_json(report)
    else:
        cols = ("bleu_4", "rouge_1", "rouge_2", "rouge_l", "cider")
        header = "".join(f"{c:>9}" for c in cols)
        row = "".join(f"{report[c]:>9.4f}" for c in cols)
        click.echo(f"{header}\n{row}")


def _clip_record(ds, clip_id: str):
    for clip in ds.clips:
        if clip.clip_id == clip_id:
            return clip
    _fail(EXIT_VALIDATION, f"clip {clip_id!r} not in dataset")


def _prompt_sequence(clip, mode: PromptMode, t: int | None):
    if mode is PromptMode.NARRATION:
        seq = list(clip.narrations)
    else:
        seq = list(clip.dynamic.graphs)
    return seq if t is None else seq[:t]


def _emit_prompt(prompt, run_llm: bool, as_json: bool, parse: bool) -> None:
    if not run_llm:
        if as_json:
            _echo_json({
                "system": prompt.system_text,
                "user": prompt.user_text,
                "expected_output_kind": prompt.expected_output_kind.value,
            })
        else:
            click.echo(f"SYSTEM:\n{prompt.system_text}\n\nUSER:\n{prompt.user_text}")
        return
    config = LLMConfig.from_env()
    if config is None:
        _fail(EXIT_UPSTREAM, "EASG_LLM_URL is not set; cannot run the LLM")
    with LLMClient(config) as client:
        completion = client.complete(prompt.system_text, prompt.user_text)
    if as_json:
        doc = {
            "prompt": {"system": prompt.system_text, "user": prompt.user_text},
            "completion": completion,
        }
        if parse:
            doc["predictions"] = [
                list(pair) for pair in parse_action_predictions(completion).pairs
            ]
        _echo_json(doc)
    else:
        click.echo(completion)


@cli.group()
def prompt() -> None:
    """Build LLM prompts from a dataset clip (optionally run them)."""


@prompt.command("anticipation")
@click.argument("dataset", type=click.Path())
@click.option("--clip", "clip_id", required=True, help="Clip to prompt from.")
@click.option("--mode", type=click.Choice(["easg", "vn"]), default="easg",
              show_default=True)
@click.option("--t", "t", type=int, default=None,
              help="Observed window length (default: whole clip).")
@click.option("--run-llm", is_flag=True, help="Send the prompt to the LLM.")
@click.option("--json", "as_json", is_flag=True, help="Emit JSON.")
@guarded
def prompt_anticipation(dataset: str, clip_id: str, mode: str, t: int | None,
                        run_llm: bool, as_json: bool) -> None:
    """Prompt asking for the next action after the observed window."""
    ds = load_dataset(dataset)
    clip = _clip_record(ds, clip_id)
    seq = _prompt_sequence(clip, PromptMode(mode), t)
    built = build_anticipation_prompt(seq, PromptMode(mode))
    _emit_prompt(built, run_llm, as_json, parse=True)


@prompt.command("summarization")
@click.argument("dataset", type=click.Path())
@click.option("--clip", "clip_id", required=True, help="Clip to prompt from.")
@click.option("--mode", type=click.Choice(["easg", "vn", "narration"]),
              default="easg", show_default=True)
@click.option("--t", "t", type=int, default=None,
              help="Use only the first T actions (default: whole clip).")
@click.option("--run-llm", is_flag=True, help="Send the prompt to the LLM.")
@click.option("--json", "as_json", is_flag=True, help="Emit JSON.")
@guarded
def prompt_summarization(dataset: str, clip_id: str, mode: str, t: int | None,
                         run_llm: bool, as_json: bool) -> None:
    """Prompt asking for a one-sentence clip summary."""
    ds = load_dataset(dataset)
    clip = _clip_record(ds, clip_id)
    seq = _prompt_sequence(clip, PromptMode(mode), t)
    built = build_summarization_prompt(seq, PromptMode(mode))
    _emit_prompt(built, run_llm, as_json, parse=False)


@cli.command("random-baseline")
@click.argument("dataset", type=click.Path())
@click.option("--seed", type=int, required=True, help="RNG seed.")
@click.option("--trials", type=int, required=True, help="Trials per graph.")
@click.option("--task", type=click.Choice(TASK_CHOICES), default="edge_cls",
              show_default=True, help="Scene graph task to score.")
@click.option("--k", "ks_text", default="10,20,50", show_default=True,
              help="Comma-separated Recall@K cutoffs.")
@click.option("--include-direct-object/--no-direct-object", default=True,
              show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Emit the report as JSON.")
@guarded
def random_baseline_cmd(dataset: str, seed: int, trials: int, task: str,
                        ks_text: str, include_direct_object: bool,
                        as_json: bool) -> None:
    """Expected Recall@K of uniformly random scores on DATASET's graphs."""
    ks = _parse_ks(ks_text)
    ds = load_dataset(dataset)
    graphs = [g for clip in ds.clips for g in clip.dynamic.graphs]
    try:
        report = random_baseline(
            graphs,
            seed=seed,
            trials=trials,
            tasks=_parse_tasks(task),
            ks=ks,
            include_direct_object=include_direct_object,
            taxonomy=ds.taxonomy,
        )
    except ValueError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    if as_json:
        _echo_json(report)
    else:
        click.echo(render_recall_table(report, ks))


main = cli

if __name__ == "__main__":
    main()
