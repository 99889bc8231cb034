"""Automatic evaluation of predicted distractor lists.

Per item, against the gold distractor set (binary relevance, normalized exact
match):

* P@k = |top-k matches| / k, R@k = |top-k matches| / |gold|,
  F1@k = harmonic mean. With |gold| = k the three coincide.
* MRR = 1 / rank of the first match (0 when none).
* NDCG@k = DCG@k / IDCG with gain 1/log2(rank+1) and the ideal ranking
  placing min(k, |gold|) matches first.

Aggregation is a macro average over items, reported scaled by 100.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .dataset import MCQItem
from .errors import DataError, UsageError
from .parallel import pmap
from .textnorm import normalize_text

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Prediction:
    """Ranked distractor predictions for one item, best first."""

    item_id: str
    ranked_distractors: tuple[str, ...]


def validate_prediction(pred: Prediction, where: str = "prediction") -> Prediction:
    if not pred.ranked_distractors:
        raise DataError(f"{where}: empty distractor list for item {pred.item_id!r}")
    norm = [normalize_text(d) for d in pred.ranked_distractors]
    if len(set(norm)) != len(norm):
        raise DataError(f"{where}: duplicate predictions for item {pred.item_id!r}")
    return pred


def is_match(pred: str, gold: str) -> bool:
    """Normalized exact equality; no substring or fuzzy credit."""
    return normalize_text(pred) == normalize_text(gold)


def _gold_set(gold: Iterable[str]) -> set[str]:
    return {normalize_text(g) for g in gold if normalize_text(g)}


def precision_recall_f1_at_k(ranked: Sequence[str], gold: Iterable[str],
                             k: int) -> tuple[float, float, float]:
    if k < 1:
        raise UsageError(f"k must be >= 1, got {k}")
    gold_norm = _gold_set(gold)
    if not gold_norm:
        raise DataError("empty gold set")
    top = {normalize_text(p) for p in ranked[:k]}
    matched = len(top & gold_norm)
    p = matched / k
    r = matched / len(gold_norm)
    f1 = 0.0 if p + r == 0 else 2 * p * r / (p + r)
    return p, r, f1


def mrr(ranked: Sequence[str], gold: Iterable[str]) -> float:
    gold_norm = _gold_set(gold)
    for i, pred in enumerate(ranked, 1):
        if normalize_text(pred) in gold_norm:
            return 1.0 / i
    return 0.0


def ndcg_at_k(ranked: Sequence[str], gold: Iterable[str], k: int) -> float:
    if k < 1:
        raise UsageError(f"k must be >= 1, got {k}")
    gold_norm = _gold_set(gold)
    if not gold_norm:
        raise DataError("empty gold set")
    dcg = sum(
        1.0 / math.log2(i + 1)
        for i, pred in enumerate(ranked[:k], 1)
        if normalize_text(pred) in gold_norm
    )
    idcg = sum(1.0 / math.log2(i + 1) for i in range(1, min(k, len(gold_norm)) + 1))
    return dcg / idcg


@dataclass(frozen=True)
class EvalReport:
    """Macro-averaged scores, scaled by 100."""

    k: int
    n_items: int
    missing_predictions: int
    p_at_1: float
    r_at_1: float
    p_at_k: float
    r_at_k: float
    f1_at_k: float
    mrr: float
    ndcg_at_k: float

    def to_json_dict(self, ndigits: int = 2) -> dict[str, object]:
        return {
            "k": self.k,
            "n_items": self.n_items,
            "missing_predictions": self.missing_predictions,
            "p@1": round(self.p_at_1, ndigits),
            "r@1": round(self.r_at_1, ndigits),
            f"p@{self.k}": round(self.p_at_k, ndigits),
            f"r@{self.k}": round(self.r_at_k, ndigits),
            f"f1@{self.k}": round(self.f1_at_k, ndigits),
            "mrr": round(self.mrr, ndigits),
            f"ndcg@{self.k}": round(self.ndcg_at_k, ndigits),
        }

    def to_table(self) -> str:
        cols = ["P@1", "R@1", f"F1@{self.k}", "MRR", f"NDCG@{self.k}"]
        vals = [self.p_at_1, self.r_at_1, self.f1_at_k, self.mrr, self.ndcg_at_k]
        width = 9
        head = "".join(c.ljust(width) for c in cols).rstrip()
        body = "".join(f"{v:.2f}".ljust(width) for v in vals).rstrip()
        return f"{head}\n{body}\n"


def evaluate(preds: list[Prediction], dataset: list[MCQItem], k: int = 3) -> EvalReport:
    """Score predictions against the dataset's gold distractors.

    Every prediction must reference a dataset item, and at most once. Items
    without a prediction are scored as empty lists (counted and warned).
    """
    if k < 1:
        raise UsageError(f"k must be >= 1, got {k}")
    if not dataset:
        raise UsageError("empty dataset")
    by_item: dict[str, Prediction] = {}
    known = {it.id for it in dataset}
    for pred in preds:
        if pred.item_id not in known:
            raise DataError(f"prediction references unknown item id {pred.item_id!r}")
        if pred.item_id in by_item:
            raise DataError(f"duplicate prediction for item id {pred.item_id!r}")
        by_item[pred.item_id] = validate_prediction(pred)

    missing = [it.id for it in dataset if it.id not in by_item]
    if missing:
        log.warning("%d item(s) have no prediction and score zero: %s%s",
                    len(missing), ", ".join(missing[:5]), "..." if len(missing) > 5 else "")

    def per_item(item: MCQItem) -> tuple[float, ...]:
        pred = by_item.get(item.id)
        ranked: Sequence[str] = pred.ranked_distractors if pred else ()
        gold = item.distractors
        p1, r1, _ = precision_recall_f1_at_k(ranked, gold, 1)
        pk, rk, f1k = precision_recall_f1_at_k(ranked, gold, k)
        return p1, r1, pk, rk, f1k, mrr(ranked, gold), ndcg_at_k(ranked, gold, k)

    rows = pmap(per_item, dataset)
    n = len(dataset)
    means = [100.0 * sum(col) / n for col in zip(*rows)]
    return EvalReport(
        k=k,
        n_items=n,
        missing_predictions=len(missing),
        p_at_1=means[0],
        r_at_1=means[1],
        p_at_k=means[2],
        r_at_k=means[3],
        f1_at_k=means[4],
        mrr=means[5],
        ndcg_at_k=means[6],
    )
