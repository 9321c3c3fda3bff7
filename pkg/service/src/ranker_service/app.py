"""HTTP serving: the scorer wire protocol plus the optional classifier.

POST /score   {"question": str, "sequences": [str]} -> {"scores": [float]}
GET  /health  -> {"status": "ok"}
POST /classify {"question": str} -> {"type": "count"|"yesno"|"other"}

Malformed bodies get 400, batches over 512 sequences get 413.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .model import load_model
from .train import classify_question, predict_scores

MAX_BATCH = 512


class ScoreRequest(BaseModel):
    question: str
    sequences: list[str]


class ClassifyRequest(BaseModel):
    question: str


def create_app(model_dir: str | Path, classifier_dir: str | Path | None = None) -> FastAPI:
    model, vocab, cfg, kind = load_model(Path(model_dir))
    if kind != "ranker":
        raise ValueError(f"{model_dir} holds a {kind!r} model, expected a ranker")
    classifier = None
    if classifier_dir is not None:
        classifier = load_model(Path(classifier_dir))
        if classifier[3] != "classifier":
            raise ValueError(f"{classifier_dir} does not hold a classifier model")

    app = FastAPI(title="kgqa ranker service")

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": "malformed request body"})

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/score")
    def score(request: ScoreRequest):
        if not request.sequences:
            return JSONResponse(
                status_code=400, content={"error": "sequences must be non-empty"}
            )
        if len(request.sequences) > MAX_BATCH:
            return JSONResponse(
                status_code=413,
                content={"error": f"batch exceeds {MAX_BATCH} sequences"},
            )
        pairs = [(request.question, sequence) for sequence in request.sequences]
        return {"scores": predict_scores(model, vocab, cfg, pairs)}

    @app.post("/classify")
    def classify(request: ClassifyRequest):
        if classifier is None:
            return JSONResponse(
                status_code=503, content={"error": "classifier not available"}
            )
        cls_model, cls_vocab, cls_cfg, _ = classifier
        return {"type": classify_question(cls_model, cls_vocab, cls_cfg, request.question)}

    return app
