"""Knowledge-augmented generation inputs.

One training/inference example per item: the stem, the answer, and the
top-ranked triplets concatenated with a field separator; the target is the
distractor list joined by the option separator. An empty triplet list
degenerates to the plain text2text baseline input.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

from .dataset import MCQItem
from .errors import UsageError
from .kg import Triplet
from .ranker import serialize_triplet

DEFAULT_MAX_TRIPLETS = 50
DEFAULT_FIELD_SEP = "</s>"
DEFAULT_TARGET_SEP = "<sep>"


@dataclass(frozen=True)
class KagExample:
    item_id: str
    input_text: str
    target_text: str
    triplet_count: int

    def to_row(self) -> dict[str, Any]:
        return {
            "item_id": self.item_id,
            "input": self.input_text,
            "target": self.target_text,
            "triplet_count": self.triplet_count,
        }


def serialize_kag(item: MCQItem, triplets: Sequence[Triplet],
                  max_triplets: int = DEFAULT_MAX_TRIPLETS,
                  field_sep: str = DEFAULT_FIELD_SEP,
                  target_sep: str = DEFAULT_TARGET_SEP) -> KagExample:
    """Serialize one item with its pre-ranked triplets (best first).

    Keeps at most ``max_triplets``, preserving the incoming order, so the
    serialized triplets are always a prefix of the ranking.
    """
    if max_triplets < 0:
        raise UsageError(f"max_triplets must be >= 0, got {max_triplets}")
    kept = list(triplets[:max_triplets])
    parts = [item.stem.strip(), item.answer.strip()]
    parts += [serialize_triplet(t) for t in kept]
    return KagExample(
        item_id=item.id,
        input_text=f" {field_sep} ".join(parts),
        target_text=f" {target_sep} ".join(d.strip() for d in item.distractors),
        triplet_count=len(kept),
    )
