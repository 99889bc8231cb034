"""Request/response models for the pipeline service."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class ErrorBody(BaseModel):
    code: str
    message: str
    exit_code: int


class ErrorResponse(BaseModel):
    error: ErrorBody


class VersionResponse(BaseModel):
    tool: str
    version: str


class PrepareDatasetRequest(BaseModel):
    format: str = Field(description="mcq | sciq | canonical")
    train_path: str
    test_path: Optional[str] = None
    dev_path: Optional[str] = None
    split_dev: bool = True
    seed: int = 13
    train_fraction: float = 0.9
    out_dir: str


class PrepareDatasetResponse(BaseModel):
    counts: dict[str, int]
    outputs: dict[str, str]
    manifest: str


class IngestRequest(BaseModel):
    corpus_path: str
    format: str = "auto"
    out_path: str


class StageResponse(BaseModel):
    counts: dict[str, Any]
    output: str
    manifest: str


class FindSentencesRequest(BaseModel):
    index_path: str
    anchor: str
    limit: int = 8


class SentenceHitModel(BaseModel):
    doc_id: str
    sentence_index: int
    text: str
    anchor_spans: list[list[int]]


class FindSentencesResponse(BaseModel):
    hits: list[SentenceHitModel]


class BuildRapRequest(BaseModel):
    dataset_path: str
    index_path: str
    out_path: str
    dataset_format: str = "canonical"
    mode: str = "S"
    gtd: bool = False
    window: int = 1
    cap: int = 8
    mask_token: str = "[MASK]"
    input_sep: str = "</s>"
    target_sep: str = "<sep>"
    max_passage_tokens: int = 128
    dedup: bool = False


class BuildRapResponse(StageResponse):
    skips: list[dict[str, str]]


class RapStatsRequest(BaseModel):
    rap_path: str


class RapStatsResponse(BaseModel):
    by_variant: dict[str, dict[str, int]]
    total: int


class RetrieveRequest(BaseModel):
    kg_path: str
    dataset_path: str
    out_path: str
    candidates_path: Optional[str] = None
    use_candidates: bool = True
    embed_requests_path: Optional[str] = None


class RankRequest(BaseModel):
    triplets_path: str
    out_path: str
    ranker: str = "cosine"
    k: int = 50
    embeddings_path: Optional[str] = None
    confidences_path: Optional[str] = None
    dataset_path: Optional[str] = None
    seed: Optional[int] = None
    blend_alpha: float = 1.0
    match: str = "exact"


class MakeLabelsRequest(BaseModel):
    triplets_path: str
    dataset_path: str
    out_path: str
    match: str = "exact"


class BuildKagRequest(BaseModel):
    dataset_path: str
    ranked_path: str
    out_path: str
    max_triplets: int = 50
    field_sep: str = "</s>"
    target_sep: str = "<sep>"


class EvaluateRequest(BaseModel):
    predictions_path: str
    dataset_path: str
    k: int = 3
    report_json_path: Optional[str] = None
    report_table_path: Optional[str] = None


class EvaluateResponse(BaseModel):
    report: dict[str, Any]
    table: str
