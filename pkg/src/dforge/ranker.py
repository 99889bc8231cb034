"""Triplet relevancy ranking against the question+answer text.

Two routes: unsupervised cosine similarity over externally supplied
embeddings, and reranking of a top-k list by externally supplied classifier
confidences. Also builds the training labels for that classifier and the
answer-endpoint filter variant.

Embedding ids: a triplet embeds as its serialized text (``head relation tail``
with the relation camel-case split into words); the question+answer string for
item ``X`` embeds under id ``qa:X``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .errors import DataError, UsageError
from .kg import Triplet
from .runmeta import require_file
from .textnorm import anchor_token_spans, normalize_text, relation_words

MATCH_MODES = ("exact", "substring")

# Ranked-list cap used by the reference pipeline configuration.
DEFAULT_TOP_K = 50


@dataclass(frozen=True)
class ScoredTriplet:
    triplet: Triplet
    score: float
    source: str  # "cosine" | "classifier"


class EmbeddingStore:
    """id -> vector map with a fixed dimension."""

    def __init__(self, dim: int, vectors: dict[str, list[float]]):
        if dim <= 0:
            raise DataError(f"embedding dim must be positive, got {dim}")
        for vid, vec in vectors.items():
            if len(vec) != dim:
                raise DataError(f"embedding {vid!r} has length {len(vec)}, expected {dim}")
        self.dim = dim
        self.vectors = vectors

    def __contains__(self, vid: str) -> bool:
        return vid in self.vectors

    def __getitem__(self, vid: str) -> list[float]:
        return self.vectors[vid]

    def __len__(self) -> int:
        return len(self.vectors)

    @classmethod
    def read_jsonl(cls, path: str | Path) -> "EmbeddingStore":
        """Read the embedding file: first line ``{"dim": N}``, then one
        ``{"id","vector"}`` object per line."""
        p = require_file(path, "embedding file")
        dim: int | None = None
        vectors: dict[str, list[float]] = {}
        with open(p, "r", encoding="utf-8") as f:
            for i, line in enumerate(f, 1):
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError as e:
                    raise DataError(f"{p}: line {i}: invalid JSON: {e.msg}") from e
                if dim is None:
                    if not isinstance(rec, dict) or "dim" not in rec:
                        raise DataError(f"{p}: first line must declare {{\"dim\": N}}")
                    dim = int(rec["dim"])
                    continue
                if not isinstance(rec, dict) or "id" not in rec or "vector" not in rec:
                    raise DataError(f"{p}: line {i}: expected keys 'id' and 'vector'")
                vid = str(rec["id"])
                if vid in vectors:
                    raise DataError(f"{p}: line {i}: duplicate embedding id {vid!r}")
                vec = rec["vector"]
                if not isinstance(vec, list) or len(vec) != dim:
                    raise DataError(f"{p}: line {i}: vector length != declared dim {dim}")
                vectors[vid] = [float(x) for x in vec]
        if dim is None:
            raise DataError(f"{p}: empty embedding file (no dim header)")
        return cls(dim, vectors)


def cosine(u: list[float], v: list[float]) -> float:
    if len(u) != len(v):
        raise UsageError(f"cosine dimension mismatch: {len(u)} vs {len(v)}")
    nu = math.sqrt(sum(x * x for x in u))
    nv = math.sqrt(sum(x * x for x in v))
    if nu == 0.0 or nv == 0.0:
        raise UsageError("cosine of a zero vector is undefined")
    return sum(x * y for x, y in zip(u, v)) / (nu * nv)


def serialize_triplet(t: Triplet) -> str:
    """Natural-text form of a triplet: ``kidney related to organ``."""
    return f"{t.head} {relation_words(t.relation)} {t.tail}"


def qa_embedding_id(item_id: str) -> str:
    return f"qa:{item_id}"


def qa_text(stem: str, answer: str) -> str:
    """The question||answer string as embedded (joined by a single space)."""
    return " ".join(part for part in (normalize_text(stem), normalize_text(answer)) if part)


def rank_unsupervised(triplets: Iterable[Triplet], qa_key: str, store: EmbeddingStore,
                      k: int) -> list[ScoredTriplet]:
    """Top-k triplets by cosine similarity to the qa vector.

    Ties break lexicographically on (head, relation, tail). Any triplet or
    qa id missing from the store is an error.
    """
    if k < 1:
        raise UsageError(f"k must be >= 1, got {k}")
    uniq = sorted(set(triplets))
    missing = [qa_key] if qa_key not in store else []
    missing += [serialize_triplet(t) for t in uniq if serialize_triplet(t) not in store]
    if missing:
        shown = ", ".join(repr(m) for m in missing[:10])
        more = f" (+{len(missing) - 10} more)" if len(missing) > 10 else ""
        raise DataError(f"missing embedding ids: {shown}{more}")
    qa_vec = store[qa_key]
    scored = [ScoredTriplet(t, cosine(store[serialize_triplet(t)], qa_vec), "cosine") for t in uniq]
    scored.sort(key=lambda st: (-st.score, st.triplet))
    return scored[:k]


def _endpoint_matches(endpoint: str, option_norm: str, match: str) -> bool:
    if match == "exact":
        return normalize_text(endpoint) == option_norm
    return bool(anchor_token_spans(endpoint, option_norm))


def label_triplets(triplets: Iterable[Triplet], answer: str, distractors: Iterable[str],
                   match: str = "exact") -> list[tuple[Triplet, str]]:
    """Label each triplet relevant/irrelevant for classifier training.

    A triplet is relevant when an endpoint matches the answer or any
    ground-truth distractor. ``match`` is strict normalized equality by
    default; "substring" accepts whole-token containment instead.
    """
    if match not in MATCH_MODES:
        raise UsageError(f"match must be one of {MATCH_MODES}, got {match!r}")
    options = [normalize_text(answer)] + [normalize_text(d) for d in distractors]
    options = [o for o in options if o]
    out = []
    for t in sorted(set(triplets)):
        hit = any(
            _endpoint_matches(ep, opt, match)
            for ep in (t.head, t.tail)
            for opt in options
        )
        out.append((t, "relevant" if hit else "irrelevant"))
    return out


def rerank_with_confidences(topk: list[ScoredTriplet],
                            confidences: Mapping[str, float]) -> list[ScoredTriplet]:
    """Re-sort a ranked list by descending classifier confidence.

    Confidence keys are serialized triplet texts. Equal confidences keep the
    incoming order (the sort is stable), so a cosine-ranked input falls back
    to its cosine tie-breaking.
    """
    missing = [serialize_triplet(st.triplet) for st in topk
               if serialize_triplet(st.triplet) not in confidences]
    if missing:
        shown = ", ".join(repr(m) for m in missing[:10])
        more = f" (+{len(missing) - 10} more)" if len(missing) > 10 else ""
        raise DataError(f"missing confidence scores: {shown}{more}")
    rescored = [
        ScoredTriplet(st.triplet, float(confidences[serialize_triplet(st.triplet)]), "classifier")
        for st in topk
    ]
    return sorted(rescored, key=lambda st: -st.score)


def filter_answer_only(triplets: Iterable[Triplet], answer: str,
                       match: str = "exact") -> list[Triplet]:
    """Triplets with the answer as an endpoint, sorted lexicographically."""
    if match not in MATCH_MODES:
        raise UsageError(f"match must be one of {MATCH_MODES}, got {match!r}")
    a = normalize_text(answer)
    if not a:
        return []
    return [t for t in sorted(set(triplets))
            if _endpoint_matches(t.head, a, match) or _endpoint_matches(t.tail, a, match)]


def training_rows(stem: str, answer: str, distractors: Iterable[str],
                  triplets: Iterable[Triplet], match: str = "exact") -> list[dict[str, object]]:
    """Rows for the classifier training file: qa text vs triplet text, 0/1 label."""
    qa = qa_text(stem, answer)
    return [
        {"text_a": qa, "text_b": serialize_triplet(t), "label": 1 if lab == "relevant" else 0}
        for t, lab in label_triplets(triplets, answer, distractors, match)
    ]
