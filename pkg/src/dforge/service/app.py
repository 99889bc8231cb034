"""HTTP service exposing the pipeline stages.

Stages take artifact paths on the server's filesystem; expensive artifacts
(corpus index, knowledge graph, embeddings) are cached in process keyed by
path and file identity, so repeated queries against the same index are cheap.
"""

from __future__ import annotations

import logging

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import TOOL_NAME, __version__, pipeline
from ..errors import DforgeError
from ..rap import RapConfig
from . import models as m

log = logging.getLogger(__name__)


def create_app() -> FastAPI:
    app = FastAPI(title="dforge", version=__version__)
    cache = pipeline.ArtifactCache()

    @app.exception_handler(DforgeError)
    async def _dforge_error(request: Request, exc: DforgeError) -> JSONResponse:
        body = {"error": {"code": exc.code, "message": str(exc), "exit_code": exc.exit_code}}
        return JSONResponse(status_code=exc.http_status, content=body)

    @app.exception_handler(Exception)
    async def _unexpected_error(request: Request, exc: Exception) -> JSONResponse:
        log.exception("unhandled error on %s", request.url.path)
        body = {"error": {"code": "internal", "message": f"{type(exc).__name__}: {exc}",
                          "exit_code": 1}}
        return JSONResponse(status_code=500, content=body)

    @app.get("/healthz")
    def healthz() -> dict[str, str]:
        return {"status": "ok"}

    @app.get("/v1/version", response_model=m.VersionResponse)
    def version() -> m.VersionResponse:
        return m.VersionResponse(tool=TOOL_NAME, version=__version__)

    @app.post("/v1/dataset/prepare", response_model=m.PrepareDatasetResponse)
    def prepare_dataset(req: m.PrepareDatasetRequest) -> m.PrepareDatasetResponse:
        result = pipeline.prepare_dataset(
            format=req.format, train_path=req.train_path, test_path=req.test_path,
            dev_path=req.dev_path, split_dev=req.split_dev, seed=req.seed,
            train_fraction=req.train_fraction, out_dir=req.out_dir,
        )
        return m.PrepareDatasetResponse(**result)

    @app.post("/v1/corpus/ingest", response_model=m.StageResponse)
    def ingest(req: m.IngestRequest) -> m.StageResponse:
        return m.StageResponse(**pipeline.ingest(req.corpus_path, req.out_path, req.format))

    @app.post("/v1/corpus/find", response_model=m.FindSentencesResponse)
    def find(req: m.FindSentencesRequest) -> m.FindSentencesResponse:
        hits = pipeline.find_sentences(req.index_path, req.anchor, req.limit, cache)
        return m.FindSentencesResponse(hits=[m.SentenceHitModel(**h) for h in hits])

    @app.post("/v1/rap/build", response_model=m.BuildRapResponse)
    def build_rap(req: m.BuildRapRequest) -> m.BuildRapResponse:
        config = RapConfig(
            mode=req.mode,
            anchoring="with_gtd" if req.gtd else "answer_only",
            window=req.window,
            per_anchor_cap=req.cap,
            mask_token=req.mask_token,
            input_sep=req.input_sep,
            target_sep=req.target_sep,
            max_passage_tokens=req.max_passage_tokens,
            dedup=req.dedup,
        )
        result = pipeline.build_rap(req.dataset_path, req.index_path, req.out_path,
                                    config, req.dataset_format, cache)
        return m.BuildRapResponse(**result)

    @app.post("/v1/rap/stats", response_model=m.RapStatsResponse)
    def rap_stats(req: m.RapStatsRequest) -> m.RapStatsResponse:
        return m.RapStatsResponse(**pipeline.rap_stats(req.rap_path))

    @app.post("/v1/kg/retrieve", response_model=m.StageResponse)
    def retrieve(req: m.RetrieveRequest) -> m.StageResponse:
        result = pipeline.retrieve(
            req.kg_path, req.dataset_path, req.out_path,
            candidates_path=req.candidates_path, use_candidates=req.use_candidates,
            embed_requests_path=req.embed_requests_path, cache=cache,
        )
        return m.StageResponse(**result)

    @app.post("/v1/rank", response_model=m.StageResponse)
    def rank(req: m.RankRequest) -> m.StageResponse:
        result = pipeline.rank(
            req.triplets_path, req.out_path, ranker=req.ranker, k=req.k,
            embeddings_path=req.embeddings_path, confidences_path=req.confidences_path,
            dataset_path=req.dataset_path, seed=req.seed, blend_alpha=req.blend_alpha,
            match=req.match, cache=cache,
        )
        return m.StageResponse(**result)

    @app.post("/v1/rank/labels", response_model=m.StageResponse)
    def make_labels(req: m.MakeLabelsRequest) -> m.StageResponse:
        result = pipeline.make_labels(req.triplets_path, req.dataset_path, req.out_path,
                                      req.match)
        return m.StageResponse(**result)

    @app.post("/v1/kag/build", response_model=m.StageResponse)
    def build_kag(req: m.BuildKagRequest) -> m.StageResponse:
        result = pipeline.build_kag(req.dataset_path, req.ranked_path, req.out_path,
                                    req.max_triplets, req.field_sep, req.target_sep)
        return m.StageResponse(**result)

    @app.post("/v1/evaluate", response_model=m.EvaluateResponse)
    def evaluate(req: m.EvaluateRequest) -> m.EvaluateResponse:
        result = pipeline.evaluate(req.predictions_path, req.dataset_path, req.k,
                                   req.report_json_path, req.report_table_path)
        return m.EvaluateResponse(**result)

    return app
