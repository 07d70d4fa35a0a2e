"""Evaluation harness: generation Recall@K, anticipation accuracy, NLG
metrics, random baseline, and dataset statistics."""

from .anticipation import anticipation_accuracy, anticipation_topk
from .generation import (
    KS_DEFAULT,
    REGIMES,
    Task,
    apply_constraint,
    evaluate_generation,
    random_baseline,
    recall_at_k,
    render_recall_table,
)
from .nlg import TOKENIZER_VERSION, bleu, cider, rouge_l, rouge_n, tokenize
from .predictions import (
    PredictionError,
    PredictionSet,
    SlotAlignmentError,
    load_predictions,
    prediction_from_jsonable,
    prediction_to_jsonable,
    save_predictions,
)
from .stats import StatsReport, compute_stats, render_stats_table

__all__ = [
    "KS_DEFAULT",
    "REGIMES",
    "TOKENIZER_VERSION",
    "PredictionError",
    "PredictionSet",
    "SlotAlignmentError",
    "StatsReport",
    "Task",
    "anticipation_accuracy",
    "anticipation_topk",
    "apply_constraint",
    "bleu",
    "cider",
    "compute_stats",
    "evaluate_generation",
    "load_predictions",
    "prediction_from_jsonable",
    "prediction_to_jsonable",
    "random_baseline",
    "recall_at_k",
    "render_recall_table",
    "render_stats_table",
    "rouge_l",
    "rouge_n",
    "save_predictions",
    "tokenize",
]
