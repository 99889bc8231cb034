"""Pipeline stages: each reads upstream artifact files, writes one output
artifact plus a run manifest, and returns a summary dict.

Stage outputs are pure functions of (inputs, config, seed): headers and
manifests carry no timestamps or absolute paths, so reruns are byte-identical.
"""

from __future__ import annotations

import logging
import random
from pathlib import Path
from typing import Any, Callable

from . import corpus as corpus_mod
from . import kag as kag_mod
from . import kg as kg_mod
from . import metrics as metrics_mod
from . import ranker as ranker_mod
from . import rap as rap_mod
from .dataset import (DEFAULT_SPLIT_SEED, DEFAULT_TRAIN_FRACTION, MCQItem,
                      load_dataset, split_train_dev, write_canonical)
from .errors import DataError, UsageError
from .runmeta import make_header, read_jsonl, require_file, write_json, write_jsonl, write_manifest

log = logging.getLogger(__name__)

RANKERS = ("cosine", "classifier", "answer_only", "none")


class ArtifactCache:
    """Caches loaded indexes/graphs/embeddings keyed by path + file identity."""

    def __init__(self) -> None:
        self._cache: dict[tuple[str, str, int, int], Any] = {}

    def _key(self, kind: str, path: str | Path) -> tuple[str, str, int, int]:
        st = require_file(path, f"{kind} file").stat()
        return (kind, str(Path(path).resolve()), st.st_mtime_ns, st.st_size)

    def get(self, kind: str, path: str | Path, loader: Callable[[str | Path], Any]) -> Any:
        key = self._key(kind, path)
        if key not in self._cache:
            self._cache[key] = loader(path)
        return self._cache[key]

    def load_index(self, path: str | Path) -> corpus_mod.CorpusIndex:
        return self.get("index", path, corpus_mod.CorpusIndex.load)

    def load_kg(self, path: str | Path) -> kg_mod.KnowledgeGraph:
        return self.get("kg", path, kg_mod.load_kg)

    def load_embeddings(self, path: str | Path) -> ranker_mod.EmbeddingStore:
        return self.get("embeddings", path, ranker_mod.EmbeddingStore.read_jsonl)


def _load_items(path: str | Path, format: str = "canonical") -> list[MCQItem]:
    items = load_dataset(path, format)
    if not items:
        raise DataError(f"no items in dataset file {path}")
    return items


def prepare_dataset(format: str, train_path: str, test_path: str | None = None,
                    dev_path: str | None = None, split_dev: bool = True,
                    seed: int = DEFAULT_SPLIT_SEED,
                    train_fraction: float = DEFAULT_TRAIN_FRACTION,
                    out_dir: str = ".") -> dict[str, Any]:
    """Normalize a benchmark into canonical train/dev/test JSONL files.

    When no dev file is given and ``split_dev`` is set, dev is carved from
    train (seeded, floor(fraction*N) stays in train).
    """
    out = Path(out_dir)
    config = {"format": format, "split_dev": split_dev, "train_fraction": train_fraction}
    train = load_dataset(train_path, format)
    dev = load_dataset(dev_path, format) if dev_path else []
    test = load_dataset(test_path, format) if test_path else []
    inputs: dict[str, str | Path] = {"train": train_path}
    if dev_path:
        inputs["dev"] = dev_path
    if test_path:
        inputs["test"] = test_path
    if not dev and split_dev:
        train, dev = split_train_dev(train, train_fraction, seed)
    outputs: dict[str, str | Path] = {}
    counts: dict[str, Any] = {}
    for name, items in (("train", train), ("dev", dev), ("test", test)):
        if not items:
            continue
        path = out / f"{name}.jsonl"
        write_canonical(items, path, config={**config, "split": name}, seed=seed)
        outputs[name] = path
        counts[name] = len(items)
    if not outputs:
        raise DataError("no items loaded from the given dataset files")
    manifest = write_manifest(out / "dataset", "prepare-dataset", config, inputs, outputs, counts, seed)
    return {"counts": counts, "outputs": {k: str(v) for k, v in outputs.items()},
            "manifest": str(manifest)}


def ingest(corpus_path: str, out_path: str, format: str = "auto") -> dict[str, Any]:
    """Index a corpus file and persist the index."""
    config = {"format": format}
    index = corpus_mod.ingest(corpus_path, format)
    index.save(out_path, header=make_header("ingest", config))
    counts = {
        "documents": index.stats.doc_count,
        "sentences": index.stats.sentence_count,
        "tokens": index.stats.token_count,
        "vocabulary": index.stats.vocabulary_size,
    }
    manifest = write_manifest(out_path, "ingest", config, {"corpus": corpus_path},
                              {"index": out_path}, counts)
    return {"counts": counts, "output": str(out_path), "manifest": str(manifest)}


def find_sentences(index_path: str, anchor: str, limit: int = 8,
                   cache: ArtifactCache | None = None) -> list[dict[str, Any]]:
    index = (cache or ArtifactCache()).load_index(index_path)
    hits = corpus_mod.find_sentences(index, anchor, limit)
    return [
        {"doc_id": h.doc_id, "sentence_index": h.sentence_index, "text": h.text,
         "anchor_spans": [list(s) for s in h.anchor_spans]}
        for h in hits
    ]


def build_rap(dataset_path: str, index_path: str, out_path: str,
              config: rap_mod.RapConfig, dataset_format: str = "canonical",
              cache: ArtifactCache | None = None) -> dict[str, Any]:
    """Build pretraining examples for every item in the dataset."""
    config.validate()
    items = _load_items(dataset_path, dataset_format)
    index = (cache or ArtifactCache()).load_index(index_path)
    skips: list[dict[str, str]] = []
    examples = list(rap_mod.build_examples(items, index, config, skip_log=skips))
    header = make_header("build-rap", config.as_dict())
    write_jsonl(out_path, (ex.to_row() for ex in examples), header)
    stats = rap_mod.corpus_stats(examples)
    counts = {"items": len(items), "examples": len(examples),
              "skipped_anchors": len(skips), "by_variant": stats.as_dict()}
    manifest = write_manifest(out_path, "build-rap", config.as_dict(),
                              {"dataset": dataset_path, "index": index_path},
                              {"examples": out_path}, counts)
    return {"counts": counts, "skips": skips, "output": str(out_path), "manifest": str(manifest)}


def rap_stats(rap_path: str) -> dict[str, Any]:
    """Per-variant counts of an emitted pretraining file."""
    rows = (row for _, row in read_jsonl(rap_path, "pretraining examples file"))
    stats = rap_mod.corpus_stats(rows)
    return {"by_variant": stats.as_dict(), "total": stats.total()}


def _read_candidates(path: str | Path) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    for i, rec in read_jsonl(path, "candidates file"):
        if "item_id" not in rec or not isinstance(rec.get("candidates"), list):
            raise DataError(f"{path}: line {i}: expected keys 'item_id' and 'candidates'")
        out[str(rec["item_id"])] = [str(c) for c in rec["candidates"]]
    return out


def retrieve(kg_path: str, dataset_path: str, out_path: str,
             candidates_path: str | None = None, use_candidates: bool = True,
             embed_requests_path: str | None = None,
             cache: ArtifactCache | None = None) -> dict[str, Any]:
    """Retrieve the keyword-matched triplet set for every item.

    Optionally also writes the embedding request file (qa strings plus every
    distinct serialized triplet) for the external encoder.
    """
    items = _load_items(dataset_path)
    graph = (cache or ArtifactCache()).load_kg(kg_path)
    candidates = _read_candidates(candidates_path) if candidates_path else {}
    config = {"use_candidates": use_candidates and bool(candidates_path)}

    rows = []
    embed_rows: list[dict[str, str]] = []
    seen_triplet_ids: set[str] = set()
    total = 0
    for item in items:
        cands = candidates.get(item.id, []) if config["use_candidates"] else []
        keywords = kg_mod.extract_keywords(item.stem, item.answer, cands, kg=graph)
        triplets = kg_mod.retrieve_triplets(graph, keywords)
        total += len(triplets)
        rows.append({
            "item_id": item.id,
            "keywords": sorted(keywords.keywords),
            "triplets": [[t.head, t.relation, t.tail] for t in triplets],
        })
        if embed_requests_path:
            embed_rows.append({"id": ranker_mod.qa_embedding_id(item.id),
                               "text": ranker_mod.qa_text(item.stem, item.answer)})
            for t in triplets:
                tid = ranker_mod.serialize_triplet(t)
                if tid not in seen_triplet_ids:
                    seen_triplet_ids.add(tid)
                    embed_rows.append({"id": tid, "text": tid})

    header = make_header("retrieve", config)
    write_jsonl(out_path, rows, header)
    outputs: dict[str, str | Path] = {"triplets": out_path}
    if embed_requests_path:
        write_jsonl(embed_requests_path, embed_rows, make_header("embed-requests", config))
        outputs["embed_requests"] = embed_requests_path
    inputs: dict[str, str | Path] = {"kg": kg_path, "dataset": dataset_path}
    if candidates_path:
        inputs["candidates"] = candidates_path
    counts = {"items": len(items), "triplets": total,
              "kg_nodes": graph.stats.nodes, "kg_edges": graph.stats.edges}
    manifest = write_manifest(out_path, "retrieve", config, inputs, outputs, counts)
    return {"counts": counts, "output": str(out_path), "manifest": str(manifest)}


def _read_triplet_sets(path: str | Path) -> list[tuple[str, list[kg_mod.Triplet]]]:
    out = []
    for i, rec in read_jsonl(path, "triplets file"):
        if "item_id" not in rec or not isinstance(rec.get("triplets"), list):
            raise DataError(f"{path}: line {i}: expected keys 'item_id' and 'triplets'")
        triplets = []
        for t in rec["triplets"]:
            if not isinstance(t, list) or len(t) != 3:
                raise DataError(f"{path}: line {i}: each triplet must be [head, relation, tail]")
            triplets.append(kg_mod.Triplet(*map(str, t)))
        out.append((str(rec["item_id"]), triplets))
    return out


def _read_confidences(path: str | Path) -> dict[str, float]:
    out: dict[str, float] = {}
    for i, rec in read_jsonl(path, "confidence file"):
        if "id" not in rec or "score" not in rec:
            raise DataError(f"{path}: line {i}: expected keys 'id' and 'score'")
        out[str(rec["id"])] = float(rec["score"])
    return out


def rank(triplets_path: str, out_path: str, ranker: str = "cosine",
         k: int = ranker_mod.DEFAULT_TOP_K, embeddings_path: str | None = None,
         confidences_path: str | None = None, dataset_path: str | None = None,
         seed: int | None = None, blend_alpha: float = 1.0, match: str = "exact",
         cache: ArtifactCache | None = None) -> dict[str, Any]:
    """Order each item's triplet set by relevancy.

    Modes: ``cosine`` (embedding similarity), ``classifier`` (cosine top-k
    re-sorted by confidence; ``blend_alpha`` < 1 mixes the cosine score back
    in), ``answer_only`` (keep answer-endpoint triplets), ``none`` (seeded
    random selection, the no-reranker baseline).
    """
    if ranker not in RANKERS:
        raise UsageError(f"ranker must be one of {RANKERS}, got {ranker!r}")
    if k < 1:
        raise UsageError(f"k must be >= 1, got {k}")
    if not 0.0 <= blend_alpha <= 1.0:
        raise UsageError(f"blend_alpha must be in [0, 1], got {blend_alpha}")
    if ranker in ("cosine", "classifier") and not embeddings_path:
        raise UsageError(f"ranker {ranker!r} requires --embeddings")
    if ranker == "classifier" and not confidences_path:
        raise UsageError("ranker 'classifier' requires --confidences")
    if ranker == "answer_only" and not dataset_path:
        raise UsageError("ranker 'answer_only' requires --dataset for the answers")
    if ranker == "none" and seed is None:
        raise UsageError("ranker 'none' requires --seed for reproducible selection")

    sets = _read_triplet_sets(triplets_path)
    inputs: dict[str, str | Path] = {"triplets": triplets_path}
    store = None
    confidences: dict[str, float] = {}
    answers: dict[str, str] = {}
    rng = random.Random(seed) if ranker == "none" else None
    cache = cache or ArtifactCache()

    if ranker in ("cosine", "classifier"):
        store = cache.load_embeddings(embeddings_path)
        inputs["embeddings"] = embeddings_path
    if ranker == "classifier":
        confidences = _read_confidences(confidences_path)
        inputs["confidences"] = confidences_path
    if ranker == "answer_only":
        answers = {it.id: it.answer for it in _load_items(dataset_path)}
        inputs["dataset"] = dataset_path

    rows = []
    total = 0
    for item_id, triplets in sets:
        scored: list[ranker_mod.ScoredTriplet]
        if not triplets:
            scored = []
        elif ranker == "cosine":
            scored = ranker_mod.rank_unsupervised(triplets, ranker_mod.qa_embedding_id(item_id),
                                                  store, k)
        elif ranker == "classifier":
            topk = ranker_mod.rank_unsupervised(triplets, ranker_mod.qa_embedding_id(item_id),
                                                store, k)
            if blend_alpha < 1.0:
                blended = {
                    ranker_mod.serialize_triplet(st.triplet):
                        blend_alpha * confidences[ranker_mod.serialize_triplet(st.triplet)]
                        + (1.0 - blend_alpha) * st.score
                    for st in topk
                    if ranker_mod.serialize_triplet(st.triplet) in confidences
                }
                missing = len(topk) - len(blended)
                if missing:
                    raise DataError(f"missing confidence scores for {missing} triplet(s)")
                scored = ranker_mod.rerank_with_confidences(topk, blended)
            else:
                scored = ranker_mod.rerank_with_confidences(topk, confidences)
        elif ranker == "answer_only":
            if item_id not in answers:
                raise DataError(f"item {item_id!r} from triplets file not in dataset")
            kept = ranker_mod.filter_answer_only(triplets, answers[item_id], match)[:k]
            scored = [ranker_mod.ScoredTriplet(t, 1.0, "answer_only") for t in kept]
        else:  # none: random baseline
            uniq = sorted(set(triplets))
            take = min(k, len(uniq))
            scored = [ranker_mod.ScoredTriplet(t, 0.0, "random")
                      for t in rng.sample(uniq, take)]
        total += len(scored)
        rows.append({
            "item_id": item_id,
            "triplets": [
                {"head": st.triplet.head, "relation": st.triplet.relation,
                 "tail": st.triplet.tail, "score": st.score, "source": st.source}
                for st in scored
            ],
        })

    config = {"ranker": ranker, "k": k, "blend_alpha": blend_alpha, "match": match}
    write_jsonl(out_path, rows, make_header("rank", config, seed))
    counts = {"items": len(sets), "ranked_triplets": total}
    manifest = write_manifest(out_path, "rank", config, inputs, {"ranked": out_path}, counts, seed)
    return {"counts": counts, "output": str(out_path), "manifest": str(manifest)}


def make_labels(triplets_path: str, dataset_path: str, out_path: str,
                match: str = "exact") -> dict[str, Any]:
    """Write the classifier training file (qa text, triplet text, 0/1 label)."""
    items = {it.id: it for it in _load_items(dataset_path)}
    sets = _read_triplet_sets(triplets_path)
    rows: list[dict[str, object]] = []
    positives = 0
    for item_id, triplets in sets:
        if item_id not in items:
            raise DataError(f"item {item_id!r} from triplets file not in dataset")
        item = items[item_id]
        for row in ranker_mod.training_rows(item.stem, item.answer, item.distractors,
                                            triplets, match):
            positives += int(row["label"] == 1)
            rows.append(row)
    config = {"match": match}
    write_jsonl(out_path, rows, make_header("make-labels", config))
    counts = {"rows": len(rows), "relevant": positives, "irrelevant": len(rows) - positives}
    manifest = write_manifest(out_path, "make-labels", config,
                              {"triplets": triplets_path, "dataset": dataset_path},
                              {"labels": out_path}, counts)
    return {"counts": counts, "output": str(out_path), "manifest": str(manifest)}


def build_kag(dataset_path: str, ranked_path: str, out_path: str,
              max_triplets: int = kag_mod.DEFAULT_MAX_TRIPLETS,
              field_sep: str = kag_mod.DEFAULT_FIELD_SEP,
              target_sep: str = kag_mod.DEFAULT_TARGET_SEP) -> dict[str, Any]:
    """Serialize augmented inputs for every dataset item.

    Items absent from the ranked file get an empty triplet list, which
    degenerates to the plain stem+answer baseline input.
    """
    items = _load_items(dataset_path)
    ranked: dict[str, list[kg_mod.Triplet]] = {}
    for i, rec in read_jsonl(ranked_path, "ranked triplets file"):
        if "item_id" not in rec or not isinstance(rec.get("triplets"), list):
            raise DataError(f"{ranked_path}: line {i}: expected keys 'item_id' and 'triplets'")
        ts = []
        for t in rec["triplets"]:
            if isinstance(t, dict):
                ts.append(kg_mod.Triplet(str(t["head"]), str(t["relation"]), str(t["tail"])))
            elif isinstance(t, list) and len(t) == 3:
                ts.append(kg_mod.Triplet(*map(str, t)))
            else:
                raise DataError(f"{ranked_path}: line {i}: unrecognized triplet shape")
        ranked[str(rec["item_id"])] = ts

    config = {"max_triplets": max_triplets, "field_sep": field_sep, "target_sep": target_sep}
    examples = [
        kag_mod.serialize_kag(item, ranked.get(item.id, []), max_triplets, field_sep, target_sep)
        for item in items
    ]
    write_jsonl(out_path, (ex.to_row() for ex in examples), make_header("build-kag", config))
    with_triplets = sum(1 for ex in examples if ex.triplet_count > 0)
    counts = {"items": len(items), "with_triplets": with_triplets,
              "triplets_serialized": sum(ex.triplet_count for ex in examples)}
    manifest = write_manifest(out_path, "build-kag", config,
                              {"dataset": dataset_path, "ranked": ranked_path},
                              {"examples": out_path}, counts)
    return {"counts": counts, "output": str(out_path), "manifest": str(manifest)}


def read_predictions(path: str | Path) -> list[metrics_mod.Prediction]:
    preds = []
    for i, rec in read_jsonl(path, "predictions file"):
        if "item_id" not in rec or not isinstance(rec.get("distractors"), list):
            raise DataError(f"{path}: line {i}: expected keys 'item_id' and 'distractors'")
        preds.append(metrics_mod.Prediction(str(rec["item_id"]),
                                            tuple(str(d) for d in rec["distractors"])))
    return preds


def evaluate(predictions_path: str, dataset_path: str, k: int = 3,
             report_json_path: str | None = None,
             report_table_path: str | None = None) -> dict[str, Any]:
    """Score a predictions file and optionally write report artifacts."""
    items = _load_items(dataset_path)
    preds = read_predictions(predictions_path)
    report = metrics_mod.evaluate(preds, items, k)
    config = {"k": k}
    payload = {"_meta": make_header("evaluate", config), **report.to_json_dict()}
    outputs: dict[str, str | Path] = {}
    if report_json_path:
        write_json(report_json_path, payload)
        outputs["report_json"] = report_json_path
    if report_table_path:
        p = Path(report_table_path)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(report.to_table(), encoding="utf-8")
        outputs["report_table"] = report_table_path
    if outputs:
        write_manifest(next(iter(outputs.values())), "evaluate", config,
                       {"predictions": predictions_path, "dataset": dataset_path},
                       outputs, {"n_items": report.n_items})
    return {"report": report.to_json_dict(), "table": report.to_table()}
