import warnings

import pytest

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient

from conftest import FIXTURES, read_jsonl_rows
from dforge.service import create_app


@pytest.fixture()
def client():
    return TestClient(create_app(), raise_server_exceptions=False)


@pytest.fixture()
def prepared(client, tmp_path):
    """Canonical splits + corpus index in a tmp dir."""
    resp = client.post("/v1/dataset/prepare", json={
        "format": "mcq", "train_path": str(FIXTURES / "mcq_train.jsonl"),
        "test_path": str(FIXTURES / "mcq_test.jsonl"), "seed": 13,
        "out_dir": str(tmp_path / "data"),
    })
    assert resp.status_code == 200, resp.text
    idx = client.post("/v1/corpus/ingest", json={
        "corpus_path": str(FIXTURES / "corpus.txt"), "out_path": str(tmp_path / "c.idx"),
    })
    assert idx.status_code == 200, idx.text
    return tmp_path


def test_healthz_and_version(client):
    assert client.get("/healthz").json() == {"status": "ok"}
    body = client.get("/v1/version").json()
    assert body["tool"] == "dforge"


def test_prepare_dataset_counts(client, tmp_path):
    resp = client.post("/v1/dataset/prepare", json={
        "format": "mcq", "train_path": str(FIXTURES / "mcq_train.jsonl"),
        "test_path": str(FIXTURES / "mcq_test.jsonl"), "seed": 13,
        "out_dir": str(tmp_path),
    })
    body = resp.json()
    assert body["counts"] == {"train": 4, "dev": 1, "test": 3}
    assert (tmp_path / "train.jsonl").exists()
    assert (tmp_path / "dataset.manifest.json").exists()


def test_find_endpoint(client, prepared):
    resp = client.post("/v1/corpus/find", json={
        "index_path": str(prepared / "c.idx"), "anchor": "kidneys", "limit": 5,
    })
    hits = resp.json()["hits"]
    assert hits and "kidneys" in hits[0]["text"]


def test_rap_build_and_stats(client, prepared):
    out = prepared / "rap.jsonl"
    resp = client.post("/v1/rap/build", json={
        "dataset_path": str(prepared / "data" / "train.jsonl"),
        "index_path": str(prepared / "c.idx"), "out_path": str(out),
        "mode": "S", "gtd": True, "cap": 1,
    })
    assert resp.status_code == 200, resp.text
    counts = resp.json()["counts"]
    assert counts["examples"] == 4 * counts["items"]
    stats = client.post("/v1/rap/stats", json={"rap_path": str(out)}).json()
    assert stats["total"] == counts["examples"]


def test_retrieve_rank_kag_evaluate(client, prepared):
    trip = prepared / "trip.jsonl"
    resp = client.post("/v1/kg/retrieve", json={
        "kg_path": str(FIXTURES / "kg.tsv"),
        "dataset_path": str(prepared / "data" / "test.jsonl"),
        "candidates_path": str(FIXTURES / "candidates.jsonl"),
        "out_path": str(trip),
    })
    assert resp.status_code == 200, resp.text
    assert resp.json()["counts"]["triplets"] == 8

    ranked = prepared / "ranked.jsonl"
    resp = client.post("/v1/rank", json={
        "triplets_path": str(trip), "out_path": str(ranked), "ranker": "cosine",
        "k": 50, "embeddings_path": str(FIXTURES / "embeddings.jsonl"),
    })
    assert resp.status_code == 200, resp.text

    kag = prepared / "kag.jsonl"
    resp = client.post("/v1/kag/build", json={
        "dataset_path": str(prepared / "data" / "test.jsonl"),
        "ranked_path": str(ranked), "out_path": str(kag),
    })
    assert resp.status_code == 200, resp.text
    rows = read_jsonl_rows(kag)
    assert len(rows) == 3
    assert all(" </s> " in r["input"] for r in rows)

    resp = client.post("/v1/evaluate", json={
        "predictions_path": str(FIXTURES / "predictions.jsonl"),
        "dataset_path": str(prepared / "data" / "test.jsonl"),
    })
    report = resp.json()["report"]
    assert report["n_items"] == 3
    assert report["p@1"] == pytest.approx(33.33, abs=0.01)
    assert report["mrr"] == pytest.approx(50.0, abs=0.01)


def test_rank_no_candidates_ablation(client, prepared):
    with_c = client.post("/v1/kg/retrieve", json={
        "kg_path": str(FIXTURES / "kg.tsv"),
        "dataset_path": str(prepared / "data" / "test.jsonl"),
        "candidates_path": str(FIXTURES / "candidates.jsonl"),
        "out_path": str(prepared / "with.jsonl"),
    }).json()["counts"]["triplets"]
    without = client.post("/v1/kg/retrieve", json={
        "kg_path": str(FIXTURES / "kg.tsv"),
        "dataset_path": str(prepared / "data" / "test.jsonl"),
        "candidates_path": str(FIXTURES / "candidates.jsonl"),
        "use_candidates": False,
        "out_path": str(prepared / "without.jsonl"),
    }).json()["counts"]["triplets"]
    assert without < with_c


def test_make_labels_endpoint(client, prepared):
    trip = prepared / "trip.jsonl"
    client.post("/v1/kg/retrieve", json={
        "kg_path": str(FIXTURES / "kg.tsv"),
        "dataset_path": str(prepared / "data" / "test.jsonl"),
        "candidates_path": str(FIXTURES / "candidates.jsonl"),
        "out_path": str(trip),
    })
    out = prepared / "labels.jsonl"
    resp = client.post("/v1/rank/labels", json={
        "triplets_path": str(trip), "dataset_path": str(prepared / "data" / "test.jsonl"),
        "out_path": str(out),
    })
    counts = resp.json()["counts"]
    assert counts["rows"] == 8
    rows = read_jsonl_rows(out)
    assert set(rows[0]) == {"text_a", "text_b", "label"}
    # kidneys related to organs has the answer as an endpoint
    by_text = {r["text_b"]: r["label"] for r in rows}
    assert by_text["kidneys related to organs"] == 1
    assert by_text["heart related to organs"] == 0


class TestErrorMapping:
    def test_missing_artifact_is_404_exit_4(self, client, tmp_path):
        resp = client.post("/v1/corpus/ingest", json={
            "corpus_path": str(tmp_path / "nope.txt"), "out_path": str(tmp_path / "o.idx"),
        })
        assert resp.status_code == 404
        assert resp.json()["error"]["exit_code"] == 4

    def test_data_error_is_422_exit_3(self, client, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"sentence": "s"}\n', encoding="utf-8")
        resp = client.post("/v1/dataset/prepare", json={
            "format": "mcq", "train_path": str(bad), "out_dir": str(tmp_path),
        })
        assert resp.status_code == 422
        assert resp.json()["error"]["exit_code"] == 3

    def test_usage_error_is_400_exit_2(self, client, prepared):
        resp = client.post("/v1/rank", json={
            "triplets_path": str(FIXTURES / "candidates.jsonl"),
            "out_path": str(prepared / "x.jsonl"), "ranker": "bogus",
        })
        assert resp.status_code == 400
        assert resp.json()["error"]["exit_code"] == 2

    def test_ranker_none_requires_seed(self, client, prepared):
        trip = prepared / "trip.jsonl"
        client.post("/v1/kg/retrieve", json={
            "kg_path": str(FIXTURES / "kg.tsv"),
            "dataset_path": str(prepared / "data" / "test.jsonl"),
            "out_path": str(trip),
        })
        resp = client.post("/v1/rank", json={
            "triplets_path": str(trip), "out_path": str(prepared / "r.jsonl"),
            "ranker": "none",
        })
        assert resp.status_code == 400
        assert "seed" in resp.json()["error"]["message"]
