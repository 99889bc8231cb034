"""Benchmark dataset loading, validation, and train/dev splitting.

Accepted input formats:

* ``mcq`` — JSONL, one object per line with keys ``sentence``, ``answer``,
  ``distractors`` (list of 3). Stems are cloze sentences containing a blank.
* ``sciq`` — JSON array of objects with keys ``question``, ``correct_answer``,
  ``distractor1``..``distractor3``.
* ``canonical`` — this tool's own JSONL: ``{"id","stem","answer","distractors"}``.

Records without an explicit id get ``<file-stem>-<record number>``, so ids are
stable across runs of the same file.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

from .errors import DataError, UsageError
from .runmeta import make_header, require_file, write_jsonl
from .textnorm import normalize_text

log = logging.getLogger(__name__)

FORMATS = ("mcq", "sciq", "canonical")

# Fixed seed used by the reference pipeline configuration for the dev split.
DEFAULT_SPLIT_SEED = 13
DEFAULT_TRAIN_FRACTION = 0.9


@dataclass(frozen=True)
class MCQItem:
    """One multiple-choice record: stem, answer, and its distractor options."""

    id: str
    stem: str
    answer: str
    distractors: tuple[str, ...]
    domain_tag: str | None = None


@dataclass(frozen=True)
class DatasetSplit:
    train: tuple[MCQItem, ...]
    dev: tuple[MCQItem, ...]
    test: tuple[MCQItem, ...]


def _validate_item(item: MCQItem, where: str) -> MCQItem:
    if not normalize_text(item.answer):
        raise DataError(f"{where}: answer is empty")
    if not item.distractors:
        raise DataError(f"{where}: no distractors")
    answer_norm = normalize_text(item.answer)
    for d in item.distractors:
        if not normalize_text(d):
            raise DataError(f"{where}: empty distractor")
        if normalize_text(d) == answer_norm:
            raise DataError(f"{where}: distractor equals the answer: {d!r}")
    return item


def _require_str(rec: dict[str, Any], key: str, where: str) -> str:
    val = rec.get(key)
    if not isinstance(val, str):
        raise DataError(f"{where}: missing or non-string field {key!r}")
    return val.strip()


def _mcq_record(rec: dict[str, Any], rec_id: str, where: str) -> MCQItem:
    stem = _require_str(rec, "sentence", where)
    answer = _require_str(rec, "answer", where)
    raw = rec.get("distractors")
    if not isinstance(raw, list) or not all(isinstance(d, str) for d in raw):
        raise DataError(f"{where}: field 'distractors' must be a list of strings")
    if len(raw) != 3:
        raise DataError(f"{where}: id {rec_id}: expected 3 distractors, got {len(raw)}")
    domain = rec.get("domain")
    return MCQItem(
        id=rec_id,
        stem=stem,
        answer=answer,
        distractors=tuple(d.strip() for d in raw),
        domain_tag=domain.strip() if isinstance(domain, str) else None,
    )


def _sciq_record(rec: dict[str, Any], rec_id: str, where: str) -> MCQItem:
    stem = _require_str(rec, "question", where)
    answer = _require_str(rec, "correct_answer", where)
    ds = tuple(_require_str(rec, f"distractor{i}", where) for i in (1, 2, 3))
    return MCQItem(id=rec_id, stem=stem, answer=answer, distractors=ds)


def _canonical_record(rec: dict[str, Any], rec_id: str, where: str) -> MCQItem:
    item_id = rec.get("id")
    stem = _require_str(rec, "stem", where)
    answer = _require_str(rec, "answer", where)
    raw = rec.get("distractors")
    if not isinstance(raw, list) or not raw or not all(isinstance(d, str) for d in raw):
        raise DataError(f"{where}: field 'distractors' must be a non-empty list of strings")
    domain = rec.get("domain_tag")
    return MCQItem(
        id=item_id if isinstance(item_id, str) and item_id else rec_id,
        stem=stem,
        answer=answer,
        distractors=tuple(d.strip() for d in raw),
        domain_tag=domain.strip() if isinstance(domain, str) else None,
    )


def _check_unique_ids(items: list[MCQItem], path: Path) -> None:
    seen: set[str] = set()
    for it in items:
        if it.id in seen:
            raise DataError(f"{path}: duplicate item id {it.id!r}")
        seen.add(it.id)


def load_dataset(path: str | Path, format: str) -> list[MCQItem]:
    """Load one dataset file into the common record shape, preserving order."""
    if format not in FORMATS:
        raise UsageError(f"unknown dataset format {format!r}; expected one of {FORMATS}")
    p = require_file(path, "dataset file")
    prefix = p.stem
    text = p.read_text(encoding="utf-8")
    items: list[MCQItem] = []

    if format == "sciq":
        if not text.strip():
            return []
        try:
            arr = json.loads(text)
        except json.JSONDecodeError as e:
            raise DataError(f"{p}: invalid JSON: {e.msg} (line {e.lineno})") from e
        if not isinstance(arr, list):
            raise DataError(f"{p}: expected a JSON array of records")
        for i, rec in enumerate(arr, 1):
            where = f"{p}: record {i}"
            if not isinstance(rec, dict):
                raise DataError(f"{where}: expected a JSON object")
            items.append(_validate_item(_sciq_record(rec, f"{prefix}-{i:05d}", where), where))
    else:
        parse = _mcq_record if format == "mcq" else _canonical_record
        rec_no = 0
        for i, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise DataError(f"{p}: line {i}: invalid JSON: {e.msg}") from e
            if not isinstance(rec, dict):
                raise DataError(f"{p}: line {i}: expected a JSON object")
            if i == 1 and "_header" in rec:
                continue
            rec_no += 1
            where = f"{p}: line {i}"
            items.append(_validate_item(parse(rec, f"{prefix}-{rec_no:05d}", where), where))

    _check_unique_ids(items, p)
    return items


def split_train_dev(items: list[MCQItem], train_fraction: float = DEFAULT_TRAIN_FRACTION,
                    seed: int = DEFAULT_SPLIT_SEED) -> tuple[list[MCQItem], list[MCQItem]]:
    """Deterministic train/dev partition.

    Indices are shuffled with a seeded PRNG and cut at floor(fraction * N);
    each side keeps the original dataset order. The same inputs and seed give
    the same membership on every run.
    """
    if not 0.0 < train_fraction < 1.0:
        raise UsageError(f"train_fraction must be in (0, 1), got {train_fraction}")
    n = len(items)
    if n < 2:
        raise UsageError("cannot form two non-empty splits from fewer than 2 items")
    n_train = int(train_fraction * n)
    if n_train == 0 or n_train == n:
        raise UsageError(f"split of {n} items at fraction {train_fraction} leaves an empty side")
    idx = list(range(n))
    random.Random(seed).shuffle(idx)
    train_idx = sorted(idx[:n_train])
    dev_idx = sorted(idx[n_train:])
    return [items[i] for i in train_idx], [items[i] for i in dev_idx]


def item_to_row(item: MCQItem) -> dict[str, Any]:
    row: dict[str, Any] = {
        "id": item.id,
        "stem": item.stem,
        "answer": item.answer,
        "distractors": list(item.distractors),
    }
    if item.domain_tag is not None:
        row["domain_tag"] = item.domain_tag
    return row


def write_canonical(items: Iterable[MCQItem], path: str | Path,
                    stage: str = "prepare-dataset", config: dict[str, Any] | None = None,
                    seed: int | None = None) -> int:
    header = make_header(stage, config or {}, seed)
    return write_jsonl(path, (item_to_row(it) for it in items), header)
