import json

import pytest

from conftest import FIXTURES, read_jsonl_rows
from dforge.cli import main


def run(argv):
    return main([str(a) for a in argv])


@pytest.fixture()
def workdir(tmp_path):
    assert run(["prepare-dataset", "--format", "mcq",
                "--train", FIXTURES / "mcq_train.jsonl",
                "--test", FIXTURES / "mcq_test.jsonl",
                "--seed", "13", "--out-dir", tmp_path / "data"]) == 0
    assert run(["ingest", "--corpus", FIXTURES / "corpus.txt",
                "--out", tmp_path / "c.idx"]) == 0
    return tmp_path


def test_full_pipeline(workdir, capsys):
    d = workdir
    assert run(["build-rap", "--dataset", d / "data" / "train.jsonl", "--index", d / "c.idx",
                "--mode", "P", "--gtd", "--window", "1", "--cap", "2",
                "--out", d / "rap.jsonl"]) == 0
    assert run(["stats", "--rap", d / "rap.jsonl"]) == 0
    assert run(["retrieve", "--kg", FIXTURES / "kg.tsv",
                "--dataset", d / "data" / "test.jsonl",
                "--candidates", FIXTURES / "candidates.jsonl",
                "--embed-requests", d / "req.jsonl",
                "--out", d / "trip.jsonl"]) == 0
    assert run(["rank", "--triplets", d / "trip.jsonl",
                "--embeddings", FIXTURES / "embeddings.jsonl",
                "--ranker", "cosine", "--k", "50", "--out", d / "ranked.jsonl"]) == 0
    assert run(["build-kag", "--dataset", d / "data" / "test.jsonl",
                "--ranked", d / "ranked.jsonl", "--out", d / "kag.jsonl"]) == 0
    assert run(["evaluate", "--predictions", FIXTURES / "predictions.jsonl",
                "--dataset", d / "data" / "test.jsonl",
                "--report-json", d / "report.json"]) == 0
    out = capsys.readouterr().out
    assert "P@1" in out and "NDCG@3" in out
    report = json.loads((d / "report.json").read_text())
    assert report["n_items"] == 3


def test_evaluate_gold_predictions_max_scores(workdir, tmp_path, capsys):
    rows = read_jsonl_rows(workdir / "data" / "test.jsonl")
    preds = tmp_path / "gold_preds.jsonl"
    with open(preds, "w", encoding="utf-8") as f:
        for r in rows:
            f.write(json.dumps({"item_id": r["id"], "distractors": r["distractors"]}) + "\n")
    assert run(["evaluate", "--predictions", preds,
                "--dataset", workdir / "data" / "test.jsonl"]) == 0
    table = capsys.readouterr().out.strip().splitlines()
    assert table[-1].split() == ["100.00", "33.33", "100.00", "100.00", "100.00"]


def test_classifier_rerank_and_ablations(workdir):
    d = workdir
    assert run(["retrieve", "--kg", FIXTURES / "kg.tsv",
                "--dataset", d / "data" / "test.jsonl",
                "--candidates", FIXTURES / "candidates.jsonl",
                "--out", d / "trip.jsonl"]) == 0
    # classifier = cosine top-k re-sorted by confidence
    assert run(["rank", "--triplets", d / "trip.jsonl",
                "--embeddings", FIXTURES / "embeddings.jsonl",
                "--confidences", FIXTURES / "confidences.jsonl",
                "--ranker", "classifier", "--out", d / "cls.jsonl"]) == 0
    rows = read_jsonl_rows(d / "cls.jsonl")
    for row in rows:
        scores = [t["score"] for t in row["triplets"]]
        assert scores == sorted(scores, reverse=True)
        assert all(t["source"] == "classifier" for t in row["triplets"])
    # w/o reranker: seeded random selection
    assert run(["rank", "--triplets", d / "trip.jsonl", "--ranker", "none",
                "--seed", "7", "--k", "2", "--out", d / "rand1.jsonl"]) == 0
    assert run(["rank", "--triplets", d / "trip.jsonl", "--ranker", "none",
                "--seed", "7", "--k", "2", "--out", d / "rand2.jsonl"]) == 0
    assert (d / "rand1.jsonl").read_bytes() == (d / "rand2.jsonl").read_bytes()
    # answer-only variant keeps only answer-endpoint triplets
    assert run(["rank", "--triplets", d / "trip.jsonl", "--ranker", "answer_only",
                "--dataset", d / "data" / "test.jsonl", "--out", d / "ans.jsonl"]) == 0
    by_item = {r["item_id"]: r["triplets"] for r in read_jsonl_rows(d / "ans.jsonl")}
    assert {(t["head"], t["tail"]) for t in by_item["mcq_test-00001"]} == {("kidneys", "organs")}


def test_make_labels_cli(workdir):
    d = workdir
    assert run(["retrieve", "--kg", FIXTURES / "kg.tsv",
                "--dataset", d / "data" / "test.jsonl",
                "--candidates", FIXTURES / "candidates.jsonl",
                "--out", d / "trip.jsonl"]) == 0
    assert run(["make-labels", "--triplets", d / "trip.jsonl",
                "--dataset", d / "data" / "test.jsonl", "--out", d / "labels.jsonl"]) == 0
    rows = read_jsonl_rows(d / "labels.jsonl")
    assert rows and set(rows[0]) == {"text_a", "text_b", "label"}


class TestExitCodes:
    def test_missing_artifact_exit_4(self, tmp_path):
        assert run(["ingest", "--corpus", tmp_path / "missing.txt",
                    "--out", tmp_path / "o.idx"]) == 4

    def test_data_error_exit_3(self, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"sentence": "no other keys"}\n', encoding="utf-8")
        assert run(["prepare-dataset", "--format", "mcq", "--train", bad,
                    "--out-dir", tmp_path]) == 3

    def test_usage_error_exit_2(self, workdir):
        assert run(["rank", "--triplets", workdir / "data" / "test.jsonl",
                    "--ranker", "cosine", "--out", workdir / "x.jsonl"]) == 2

    def test_argparse_usage_exit_2(self):
        with pytest.raises(SystemExit) as exc:
            run(["build-rap"])  # missing required flags
        assert exc.value.code == 2


def test_config_file_supplies_defaults(tmp_path, capsys):
    conf = tmp_path / "dforge.conf"
    conf.write_text(
        "# pipeline defaults\n"
        f"train = {FIXTURES / 'mcq_train.jsonl'}\n"
        "format = mcq\n"
        "seed = 13\n"
        f"out-dir = {tmp_path / 'data'}\n",
        encoding="utf-8",
    )
    assert run(["--config", conf, "prepare-dataset", "--format", "mcq",
                "--train", FIXTURES / "mcq_train.jsonl",
                "--out-dir", tmp_path / "data"]) == 0
    assert (tmp_path / "data" / "train.jsonl").exists()
    # config alone can satisfy required flags it names
    assert run(["--config", conf, "prepare-dataset"]) == 0


def test_headers_carry_seed_and_config_hash(workdir):
    first = (workdir / "data" / "train.jsonl").read_text().splitlines()[0]
    header = json.loads(first)["_header"]
    assert header["tool"] == "dforge"
    assert header["seed"] == 13
    assert header["config_hash"]
