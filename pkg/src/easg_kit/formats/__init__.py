"""Serialization: triplet strings, sentences, prompts, and the dataset file."""

from .dataset import (
    SCHEMA_VERSION,
    AnnotationArtifacts,
    ClipRecord,
    DatasetError,
    DatasetFile,
    DatasetValidationError,
    SchemaError,
    answer_from_jsonable,
    answer_to_jsonable,
    dataset_from_jsonable,
    dataset_to_jsonable,
    dumps_dataset,
    graph_from_jsonable,
    graph_to_jsonable,
    load_dataset,
    loads_dataset,
    override_from_jsonable,
    override_to_jsonable,
    question_from_jsonable,
    question_to_jsonable,
    save_dataset,
)
from .prompts import (
    ANTICIPATION_LENGTHS,
    ANTICIPATION_SYSTEM_EASG,
    ANTICIPATION_SYSTEM_VN,
    MAX_PREDICTIONS,
    SUMMARIZATION_MIN_LENGTH,
    SUMMARIZATION_SYSTEM_EASG,
    SUMMARIZATION_SYSTEM_VN,
    ActionPrediction,
    OutputKind,
    Prompt,
    PromptError,
    PromptMode,
    build_anticipation_prompt,
    build_summarization_prompt,
    parse_action_predictions,
)
from .text import (
    SUBJECT_TOKENS,
    TripletParseError,
    parse_triplet_string,
    to_sentence,
    to_triplet_string,
)

__all__ = [
    "ANTICIPATION_LENGTHS",
    "ANTICIPATION_SYSTEM_EASG",
    "ANTICIPATION_SYSTEM_VN",
    "MAX_PREDICTIONS",
    "SCHEMA_VERSION",
    "SUBJECT_TOKENS",
    "SUMMARIZATION_MIN_LENGTH",
    "SUMMARIZATION_SYSTEM_EASG",
    "SUMMARIZATION_SYSTEM_VN",
    "ActionPrediction",
    "AnnotationArtifacts",
    "ClipRecord",
    "DatasetError",
    "DatasetFile",
    "DatasetValidationError",
    "OutputKind",
    "Prompt",
    "PromptError",
    "PromptMode",
    "SchemaError",
    "TripletParseError",
    "answer_from_jsonable",
    "answer_to_jsonable",
    "build_anticipation_prompt",
    "build_summarization_prompt",
    "dataset_from_jsonable",
    "dataset_to_jsonable",
    "dumps_dataset",
    "graph_from_jsonable",
    "graph_to_jsonable",
    "load_dataset",
    "loads_dataset",
    "override_from_jsonable",
    "override_to_jsonable",
    "parse_action_predictions",
    "question_from_jsonable",
    "question_to_jsonable",
    "parse_triplet_string",
    "save_dataset",
    "to_sentence",
    "to_triplet_string",
]
