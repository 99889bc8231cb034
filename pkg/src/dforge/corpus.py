"""Corpus ingestion, sentence index, and anchor retrieval.

A corpus is a set of documents, either blank-line-separated plain text or
JSONL ``{"id","text"}``. Each document is segmented into sentences and every
sentence is indexed under each of its normalized tokens. Retrieval finds
sentences containing an anchor string as a whole token sequence; hits can be
expanded to passages and reranked by BM25 relevance to a query.

The index persists to a binary file with magic header ``DFIDX1``; the trailing
digit is the format version, and loading any other version is an error.
"""

from __future__ import annotations

import json
import math
import zlib
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Any, Iterator

from .errors import DataError, UsageError
from .runmeta import require_file
from .textnorm import anchor_token_spans, normalize_text, split_sentences, token_spans, tokens

MAGIC = b"DFIDX1"

BM25_K1 = 1.2
BM25_B = 0.75


@dataclass(frozen=True)
class Document:
    doc_id: str
    text: str


@dataclass(frozen=True)
class SentenceHit:
    doc_id: str
    sentence_index: int
    text: str
    anchor_spans: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class IndexStats:
    doc_count: int
    sentence_count: int
    token_count: int
    vocabulary_size: int


class CorpusIndex:
    """Immutable after construction; concurrent reads need no coordination."""

    def __init__(self, docs: dict[str, list[str]],
                 postings: dict[str, list[tuple[str, int]]],
                 stats: IndexStats):
        self.docs = docs
        self.postings = postings
        self.stats = stats

    def sentence(self, doc_id: str, sentence_index: int) -> str:
        doc = self.docs.get(doc_id)
        if doc is None or not 0 <= sentence_index < len(doc):
            raise DataError(f"hit does not resolve in index: ({doc_id!r}, {sentence_index})")
        return doc[sentence_index]

    def save(self, path: str | Path, header: dict[str, Any] | None = None) -> None:
        payload = {
            "header": header or {},
            "stats": asdict(self.stats),
            "docs": self.docs,
            "postings": {t: [[d, i] for d, i in ps] for t, ps in self.postings.items()},
        }
        blob = zlib.compress(
            json.dumps(payload, sort_keys=True, ensure_ascii=False).encode("utf-8"), 6
        )
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        tmp = p.with_name(p.name + ".tmp")
        with open(tmp, "wb") as f:
            f.write(MAGIC)
            f.write(blob)
        tmp.replace(p)

    @classmethod
    def load(cls, path: str | Path) -> "CorpusIndex":
        p = require_file(path, "corpus index")
        raw = p.read_bytes()
        if raw[: len(MAGIC) - 1] != MAGIC[:-1]:
            raise DataError(f"{p}: not a corpus index file (bad magic)")
        if raw[: len(MAGIC)] != MAGIC:
            got = raw[len(MAGIC) - 1 : len(MAGIC)].decode("ascii", "replace")
            raise DataError(f"{p}: unsupported index version {got!r} (expected {MAGIC[-1:].decode()})")
        try:
            payload = json.loads(zlib.decompress(raw[len(MAGIC):]).decode("utf-8"))
        except (zlib.error, json.JSONDecodeError) as e:
            raise DataError(f"{p}: corrupt index payload: {e}") from e
        postings = {t: [(d, i) for d, i in ps] for t, ps in payload["postings"].items()}
        return cls(payload["docs"], postings, IndexStats(**payload["stats"]))


def iter_documents(corpus_path: str | Path, format: str = "auto") -> Iterator[Document]:
    """Parse a corpus file into documents.

    Plain text: documents separated by blank lines, newlines inside a document
    are whitespace. JSONL: one ``{"id","text"}`` object per line.
    """
    p = require_file(corpus_path, "corpus file")
    if format == "auto":
        first = ""
        with open(p, "r", encoding="utf-8") as f:
            for line in f:
                if line.strip():
                    first = line.strip()
                    break
        format = "jsonl" if first.startswith("{") else "text"
    if format == "jsonl":
        with open(p, "r", encoding="utf-8") as f:
            for i, line in enumerate(f, 1):
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError as e:
                    raise DataError(f"{p}: line {i}: invalid JSON: {e.msg}") from e
                if i == 1 and isinstance(rec, dict) and "_header" in rec:
                    continue
                if not isinstance(rec, dict) or "id" not in rec or "text" not in rec:
                    raise DataError(f"{p}: line {i}: expected keys 'id' and 'text'")
                yield Document(str(rec["id"]), str(rec["text"]))
    elif format == "text":
        buf: list[str] = []
        n = 0
        with open(p, "r", encoding="utf-8") as f:
            for line in f:
                if line.strip():
                    buf.append(line.strip())
                elif buf:
                    n += 1
                    yield Document(f"doc{n:06d}", " ".join(buf))
                    buf = []
        if buf:
            n += 1
            yield Document(f"doc{n:06d}", " ".join(buf))
    else:
        raise UsageError(f"unknown corpus format {format!r}; expected auto, text, or jsonl")


def ingest(corpus_path: str | Path, format: str = "auto") -> CorpusIndex:
    """Build the sentence index for a corpus file."""
    docs: dict[str, list[str]] = {}
    postings: dict[str, list[tuple[str, int]]] = {}
    sentence_count = 0
    token_count = 0
    for doc in iter_documents(corpus_path, format):
        if doc.doc_id in docs:
            raise DataError(f"duplicate document id {doc.doc_id!r}")
        sents = split_sentences(doc.text)
        docs[doc.doc_id] = sents
        for sidx, sent in enumerate(sents):
            toks = tokens(sent)
            token_count += len(toks)
            for tok in set(toks):
                postings.setdefault(tok, []).append((doc.doc_id, sidx))
        sentence_count += len(sents)
    if sentence_count == 0:
        raise DataError(f"empty corpus: {corpus_path}")
    for ps in postings.values():
        ps.sort()
    stats = IndexStats(
        doc_count=len(docs),
        sentence_count=sentence_count,
        token_count=token_count,
        vocabulary_size=len(postings),
    )
    return CorpusIndex(docs, postings, stats)


def find_sentences(index: CorpusIndex, anchor: str, limit: int) -> list[SentenceHit]:
    """Sentences containing ``anchor`` as a whole token sequence.

    Results are ordered by (doc_id, sentence_index) and truncated to ``limit``.
    A missing anchor yields an empty list, not an error: sparse corpora are
    expected and the caller decides whether to skip.
    """
    if limit <= 0:
        raise UsageError(f"limit must be positive, got {limit}")
    anchor_toks = tokens(normalize_text(anchor))
    if not anchor_toks:
        raise UsageError("anchor normalizes to empty")
    # Scan postings of the rarest anchor token, then verify the full sequence.
    seed_tok = min(anchor_toks, key=lambda t: len(index.postings.get(t, [])))
    hits: list[SentenceHit] = []
    for doc_id, sidx in index.postings.get(seed_tok, []):
        sent = index.docs[doc_id][sidx]
        spans = anchor_token_spans(sent, anchor)
        if spans:
            hits.append(SentenceHit(doc_id, sidx, sent, tuple(spans)))
            if len(hits) >= limit:
                break
    return hits


def expand_passage(index: CorpusIndex, hit: SentenceHit, window: int, max_tokens: int) -> str:
    """Hit sentence plus up to ``window`` neighbors each side, token-budgeted.

    Trimming removes whole sentences from whichever side is farther from the
    anchor sentence (the trailing side on ties); the anchor sentence itself is
    always kept, even if it alone exceeds the budget.
    """
    if window < 0:
        raise UsageError(f"window must be non-negative, got {window}")
    if max_tokens <= 0:
        raise UsageError(f"max_tokens must be positive, got {max_tokens}")
    doc = index.docs.get(hit.doc_id)
    if doc is None or not 0 <= hit.sentence_index < len(doc):
        raise DataError(f"hit does not resolve in index: ({hit.doc_id!r}, {hit.sentence_index})")
    idx = hit.sentence_index
    lo = max(0, idx - window)
    hi = min(len(doc) - 1, idx + window)
    counts = [len(token_spans(doc[i])) for i in range(lo, hi + 1)]

    def total() -> int:
        return sum(counts)

    while total() > max_tokens and lo < hi:
        if idx - lo > hi - idx:
            lo += 1
            counts.pop(0)
        else:
            hi -= 1
            counts.pop()
    return " ".join(doc[lo : hi + 1])


def bm25_scores(texts: list[str], query: str, k1: float = BM25_K1, b: float = BM25_B) -> list[float]:
    """Okapi BM25 of each text against ``query``, with the texts themselves as
    the collection (document frequencies and average length come from them)."""
    doc_toks = [tokens(t) for t in texts]
    n = len(texts)
    if n == 0:
        return []
    avgdl = sum(len(t) for t in doc_toks) / n
    q_toks = sorted(set(tokens(normalize_text(query))))
    scores = [0.0] * n
    if not q_toks or avgdl == 0:
        return scores
    for qt in q_toks:
        df = sum(1 for dt in doc_toks if qt in dt)
        if df == 0:
            continue
        idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
        for i, dt in enumerate(doc_toks):
            tf = dt.count(qt)
            if tf == 0:
                continue
            denom = tf + k1 * (1.0 - b + b * len(dt) / avgdl)
            scores[i] += idf * tf * (k1 + 1.0) / denom
    return scores


def rank_hits(hits: list[SentenceHit], query: str) -> list[SentenceHit]:
    """Reorder hits by descending BM25 score against ``query``.

    Ties (including the no-signal case of an empty query) fall back to
    (doc_id, sentence_index) order.
    """
    if not hits:
        return []
    scores = bm25_scores([h.text for h in hits], query)
    order = sorted(range(len(hits)), key=lambda i: (-scores[i], hits[i].doc_id, hits[i].sentence_index))
    return [hits[i] for i in order]
