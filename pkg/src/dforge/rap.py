"""Retrieval-augmented pretraining data: masked pseudo-questions.

For each item, the anchor option (the answer, and optionally each ground-truth
distractor) retrieves corpus sentences; the anchor is masked out and the
remaining options become the generation target. Two layouts:

* anchor = answer: input ``<masked> </s> <answer>``, target ``d1 <sep> d2 <sep> d3``
* anchor = distractor d_i: input ``<masked> </s> <d_i>``, target is the answer
  followed by the other distractors in their original order.

Sentence mode (``S``) emits the hit sentence; passage mode (``P``) expands it
with neighboring sentences. Output text is normalized (lowercased), with the
mask token inserted verbatim.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator

from .corpus import CorpusIndex, expand_passage, find_sentences, rank_hits
from .dataset import MCQItem
from .errors import DataError, UsageError
from .parallel import pmap
from .textnorm import anchor_token_spans, normalize_text, replace_spans

log = logging.getLogger(__name__)

MODES = ("S", "P")
ANCHORINGS = ("answer_only", "with_gtd")


@dataclass(frozen=True)
class RapConfig:
    mode: str = "S"
    anchoring: str = "answer_only"
    window: int = 1
    per_anchor_cap: int = 8
    mask_token: str = "[MASK]"
    input_sep: str = "</s>"
    target_sep: str = "<sep>"
    max_passage_tokens: int = 128
    dedup: bool = False

    def validate(self) -> None:
        if self.mode not in MODES:
            raise UsageError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.anchoring not in ANCHORINGS:
            raise UsageError(f"anchoring must be one of {ANCHORINGS}, got {self.anchoring!r}")
        if self.mode == "P" and self.window < 1:
            raise UsageError(f"window must be >= 1 in passage mode, got {self.window}")
        if self.per_anchor_cap < 1:
            raise UsageError(f"per_anchor_cap must be >= 1, got {self.per_anchor_cap}")
        if not self.mask_token:
            raise UsageError("mask_token must be non-empty")
        if self.max_passage_tokens < 1:
            raise UsageError(f"max_passage_tokens must be >= 1, got {self.max_passage_tokens}")

    def as_dict(self) -> dict[str, Any]:
        return {
            "mode": self.mode,
            "anchoring": self.anchoring,
            "window": self.window,
            "per_anchor_cap": self.per_anchor_cap,
            "mask_token": self.mask_token,
            "input_sep": self.input_sep,
            "target_sep": self.target_sep,
            "max_passage_tokens": self.max_passage_tokens,
            "dedup": self.dedup,
        }


@dataclass(frozen=True)
class PseudoQuestion:
    item_id: str
    source: str  # "sentence" | "passage"
    masked_text: str
    mask_token: str
    anchor: str
    target_options: tuple[str, ...]


@dataclass(frozen=True)
class RapExample:
    input_text: str
    target_text: str
    provenance: dict[str, Any]
    pseudo: PseudoQuestion

    def to_row(self) -> dict[str, Any]:
        return {
            "item_id": self.provenance["item_id"],
            "variant": self.provenance["variant"],
            "anchoring": self.provenance["anchoring"],
            "input": self.input_text,
            "target": self.target_text,
            "doc_id": self.provenance["doc_id"],
            "sentence_index": self.provenance["sentence_index"],
        }


@dataclass
class RapStats:
    """Counts of emitted examples per (variant, anchoring class)."""

    counts: dict[str, dict[str, int]] = field(default_factory=dict)

    def add(self, variant: str, anchoring: str) -> None:
        kind = "gtd" if anchoring.startswith("gtd") else "answer"
        per = self.counts.setdefault(variant, {"answer": 0, "gtd": 0})
        per[kind] += 1

    def total(self, variant: str | None = None) -> int:
        if variant is not None:
            per = self.counts.get(variant, {})
            return sum(per.values())
        return sum(sum(per.values()) for per in self.counts.values())

    def as_dict(self) -> dict[str, Any]:
        return {
            v: {**per, "total": sum(per.values())}
            for v, per in sorted(self.counts.items())
        }


def mask_anchor(text: str, anchor: str, mask_token: str) -> str:
    """Replace every whole-token occurrence of ``anchor`` with ``mask_token``."""
    spans = anchor_token_spans(text, anchor)
    if not spans:
        raise DataError(f"anchor not found at a token boundary: {anchor!r}")
    return replace_spans(text, spans, mask_token)


def _item_examples(item: MCQItem, index: CorpusIndex, config: RapConfig,
                   skip_log: list[dict[str, str]] | None) -> list[RapExample]:
    out: list[RapExample] = []
    anchors: list[tuple[str, str]] = [(item.answer, "answer")]
    if config.anchoring == "with_gtd":
        anchors += [(d, f"gtd:{i}") for i, d in enumerate(item.distractors, 1)]
    pool = max(config.per_anchor_cap * 16, 128)
    for anchor_text, tag in anchors:
        hits = find_sentences(index, anchor_text, pool)
        if not hits:
            log.info("no sentence found for item %s anchor %r", item.id, anchor_text)
            if skip_log is not None:
                skip_log.append({"item_id": item.id, "anchoring": tag, "anchor": anchor_text})
            continue
        chosen = rank_hits(hits, item.stem)[: config.per_anchor_cap]
        if tag == "answer":
            targets = tuple(normalize_text(d) for d in item.distractors)
        else:
            skip_i = int(tag.split(":", 1)[1])
            targets = (normalize_text(item.answer),) + tuple(
                normalize_text(d) for j, d in enumerate(item.distractors, 1) if j != skip_i
            )
        anchor_norm = normalize_text(anchor_text)
        for hit in chosen:
            if config.mode == "P":
                base = expand_passage(index, hit, config.window, config.max_passage_tokens)
                source = "passage"
            else:
                base = hit.text
                source = "sentence"
            masked = mask_anchor(normalize_text(base), anchor_norm, config.mask_token)
            pseudo = PseudoQuestion(
                item_id=item.id,
                source=source,
                masked_text=masked,
                mask_token=config.mask_token,
                anchor=anchor_norm,
                target_options=targets,
            )
            out.append(RapExample(
                input_text=f"{masked} {config.input_sep} {anchor_norm}",
                target_text=f" {config.target_sep} ".join(targets),
                provenance={
                    "item_id": item.id,
                    "variant": config.mode,
                    "anchoring": tag,
                    "doc_id": hit.doc_id,
                    "sentence_index": hit.sentence_index,
                },
                pseudo=pseudo,
            ))
    return out


def build_examples(items: list[MCQItem], index: CorpusIndex, config: RapConfig,
                   skip_log: list[dict[str, str]] | None = None) -> Iterator[RapExample]:
    """Yield pretraining examples in item order.

    Anchors with no corpus match are skipped and logged (recorded in
    ``skip_log`` when given). With ``config.dedup``, exact (input, target)
    duplicates are dropped.
    """
    config.validate()
    if not items:
        raise UsageError("no items to build examples from")
    per_item = pmap(lambda it: _item_examples(it, index, config, skip_log), items)
    seen: set[tuple[str, str]] = set()
    for examples in per_item:
        for ex in examples:
            if config.dedup:
                key = (ex.input_text, ex.target_text)
                if key in seen:
                    continue
                seen.add(key)
            yield ex


def corpus_stats(examples: Iterable[RapExample | dict[str, Any]]) -> RapStats:
    """Count emitted examples per (variant, anchoring class)."""
    stats = RapStats()
    for ex in examples:
        if isinstance(ex, RapExample):
            stats.add(ex.provenance["variant"], ex.provenance["anchoring"])
        else:
            stats.add(str(ex.get("variant")), str(ex.get("anchoring")))
    return stats
