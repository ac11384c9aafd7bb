"""BioASQ-to-extractive QA toolkit: conversion, auditing, metrics, toy transfer harness."""

import json
from pathlib import Path

from ._core import (
    BioqaError,
    DataMismatch,
    InvalidArgument,
    IoError,
    ParseError,
    SchemaError,
    classify_match,
    count_tokens,
    decode_spans,
    dedup_answers,
    eval_factoid,
    eval_list,
    eval_yesno,
    find_exact_spans,
    format_rate,
    log_softmax,
    macro_average,
    normalize_answer,
    reduce_to_minimal_context,
    segment_sentences,
    sigmoid,
)
from . import _core

__version__ = "0.1.0"


def convert_bioasq(bioasq, strategy="snippet", window=1, boundary=True):
    """Returns (squad_dict, report_dict). `bioasq` is a dict or JSON text."""
    text = bioasq if isinstance(bioasq, str) else json.dumps(bioasq)
    squad, report = _core.convert_bioasq_json(text, strategy, window, boundary)
    return json.loads(squad), json.loads(report)


def audit(paths, batch_names=None):
    """Unanswerable-rate report over BioASQ golden files, one batch per file."""
    paths = [Path(p) for p in paths]
    names = batch_names if batch_names is not None else [p.stem for p in paths]
    texts = [p.read_text(encoding="utf-8") for p in paths]
    return json.loads(_core.audit_json(texts, list(names)))


def length_stats(contexts, other=None):
    return json.loads(_core.length_stats_json(list(contexts), list(other or [])))


def run_plan(plan, base_dir="."):
    """Runs a transfer plan (dict, JSON text or path) and returns logs and metrics."""
    if isinstance(plan, Path) or (isinstance(plan, str) and not plan.lstrip().startswith("{")):
        path = Path(plan)
        return json.loads(_core.run_plan_json(path.read_text(encoding="utf-8"), str(path.parent)))
    text = plan if isinstance(plan, str) else json.dumps(plan)
    return json.loads(_core.run_plan_json(text, str(base_dir)))
