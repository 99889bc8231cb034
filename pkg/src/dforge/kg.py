"""Knowledge graph loading, keyword extraction, and triplet retrieval.

The graph comes from a headerless TSV (``head<TAB>relation<TAB>tail``). Node
labels are normalized with underscores mapped to spaces; relations are kept
verbatim. Retrieval returns exactly the edges whose both endpoints are in the
keyword set, in sorted (head, relation, tail) order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import DataError
from .runmeta import require_file
from .textnorm import normalize_text, stopwords, tokens

log = logging.getLogger(__name__)

# Longest n-gram of the question probed against graph node labels.
MAX_LABEL_NGRAM = 3


@dataclass(frozen=True, order=True)
class Triplet:
    head: str
    relation: str
    tail: str


@dataclass(frozen=True)
class KgStats:
    nodes: int
    edges: int
    self_loops_dropped: int
    duplicate_edges_dropped: int


class KnowledgeGraph:
    """Immutable after load; retrieval is read-only."""

    def __init__(self, edges: list[Triplet], self_loops_dropped: int, duplicates_dropped: int):
        self.edges = sorted(edges)
        labels = sorted({e.head for e in self.edges} | {e.tail for e in self.edges})
        self.node_ids: dict[str, int] = {lab: i for i, lab in enumerate(labels)}
        self.labels = labels
        self.adjacency: list[list[int]] = [[] for _ in labels]
        for eidx, e in enumerate(self.edges):
            self.adjacency[self.node_ids[e.head]].append(eidx)
            self.adjacency[self.node_ids[e.tail]].append(eidx)
        self.stats = KgStats(
            nodes=len(labels),
            edges=len(self.edges),
            self_loops_dropped=self_loops_dropped,
            duplicate_edges_dropped=duplicates_dropped,
        )

    def has_node(self, label: str) -> bool:
        return label in self.node_ids


def normalize_label(label: str) -> str:
    # ConceptNet convention: underscores join multi-word concepts.
    return normalize_text(label.replace("_", " "))


def load_kg(path: str | Path) -> KnowledgeGraph:
    """Load a TSV edge list, dropping self-loops and duplicate edges."""
    p = require_file(path, "knowledge graph file")
    text = p.read_text(encoding="utf-8")
    if not text.strip():
        raise DataError(f"{p}: empty knowledge graph file")
    edges: list[Triplet] = []
    seen: set[Triplet] = set()
    self_loops = 0
    duplicates = 0
    for i, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            raise DataError(f"{p}: line {i}: expected head<TAB>relation<TAB>tail, got {len(cols)} columns")
        head = normalize_label(cols[0])
        relation = cols[1].strip()
        tail = normalize_label(cols[2])
        if not head or not relation or not tail:
            raise DataError(f"{p}: line {i}: empty field")
        if head == tail:
            self_loops += 1
            continue
        t = Triplet(head, relation, tail)
        if t in seen:
            duplicates += 1
            continue
        seen.add(t)
        edges.append(t)
    if self_loops:
        log.info("dropped %d self-loop edge(s) from %s", self_loops, p.name)
    if duplicates:
        log.info("dropped %d duplicate edge(s) from %s", duplicates, p.name)
    return KnowledgeGraph(edges, self_loops, duplicates)


@dataclass
class KeywordSet:
    keywords: set[str] = field(default_factory=set)
    provenance: dict[str, str] = field(default_factory=dict)

    def _add(self, kw: str, source: str) -> None:
        if not kw:
            return
        self.keywords.add(kw)
        # answer beats candidate beats question when a keyword has several sources
        rank = {"question": 0, "candidate": 1, "answer": 2}
        if kw not in self.provenance or rank[source] > rank[self.provenance[kw]]:
            self.provenance[kw] = source


def extract_keywords(q: str, a: str, candidates: list[str],
                     kg: KnowledgeGraph | None = None) -> KeywordSet:
    """Keyword set drawn from the question, answer, and candidate options.

    Question keywords are its content words (bundled stopword list applied)
    plus any 2..3-gram that exactly matches a graph node label when a graph is
    supplied (longest match wins, scanning left to right). The answer and the
    candidates are always included whole.
    """
    ks = KeywordSet()
    sw = stopwords()
    q_toks = tokens(normalize_text(q))
    for tok in q_toks:
        if tok not in sw:
            ks._add(tok, "question")
    if kg is not None:
        pos = 0
        while pos < len(q_toks):
            matched = False
            for n in range(MAX_LABEL_NGRAM, 1, -1):
                if pos + n <= len(q_toks):
                    gram = " ".join(q_toks[pos : pos + n])
                    if kg.has_node(gram):
                        ks._add(gram, "question")
                        pos += n
                        matched = True
                        break
            if not matched:
                pos += 1
    for c in candidates:
        ks._add(normalize_text(c), "candidate")
    ks._add(normalize_text(a), "answer")
    return ks


def retrieve_triplets(kg: KnowledgeGraph, keywords: KeywordSet | Iterable[str]) -> list[Triplet]:
    """Edges whose both endpoints are keyword labels, direction-agnostic.

    Walks the adjacency lists of the matched nodes rather than scanning every
    edge; the result is set-semantic and sorted by (head, relation, tail).
    """
    words = keywords.keywords if isinstance(keywords, KeywordSet) else set(keywords)
    node_ids = {kg.node_ids[w] for w in words if w in kg.node_ids}
    picked: set[int] = set()
    for nid in node_ids:
        for eidx in kg.adjacency[nid]:
            e = kg.edges[eidx]
            if kg.node_ids[e.head] in node_ids and kg.node_ids[e.tail] in node_ids:
                picked.add(eidx)
    return [kg.edges[i] for i in sorted(picked)]
