"""HTTP surface for the annotation workflow.

JSON API over the event-sourced store, plus static audio serving for
playback and CORS for the workbench origin. Draft and variant texts come
from the configured judge endpoint (the deterministic mock in offline
setups); a judge transport failure leaves the item state untouched so the
step can simply be retried.
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .. import prompts
from ..core import TaskKind
from ..judge import JudgeClient, TransportError, UnparseableVerdict
from .store import (
    IllegalTransition,
    LeaseError,
    ValidationFailure,
    WorkItemStore,
)

_VARIANT_LINE_RE = re.compile(r"^\s*\d+[.)]\s*(?P<text>.+?)\s*$")


class CreateItemRequest(BaseModel):
    id: str
    sample_ids: list[str]
    task: str


class LeaseRequest(BaseModel):
    annotator: str
    ttl: Optional[float] = None


class QuestionnaireRequest(BaseModel):
    token: str
    fields: dict


class RevisionRequest(BaseModel):
    token: str
    text: str


class TokenRequest(BaseModel):
    token: str


class SelectionRequest(BaseModel):
    token: str
    index: int


def _parse_variants(reply: str, k: int) -> list[str]:
    texts = []
    for line in reply.splitlines():
        match = _VARIANT_LINE_RE.match(line)
        if match:
            texts.append(match.group("text"))
    return texts[:k]


def create_app(
    store: WorkItemStore,
    judge_client: Optional[JudgeClient] = None,
    audio_dir: Optional[Path] = None,
    cors_origins: tuple[str, ...] = ("*",),
) -> FastAPI:
    app = FastAPI(title="annotation workflow")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )
    if audio_dir is not None:
        app.mount("/audio", StaticFiles(directory=str(audio_dir)), name="audio")

    def _require_judge() -> JudgeClient:
        if judge_client is None:
            raise HTTPException(status_code=503, detail="no generation endpoint configured")
        return judge_client

    def _get_or_404(item_id: str):
        try:
            return store.get(item_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"no work item {item_id!r}") from None

    @app.exception_handler(IllegalTransition)
    async def _illegal(request, exc):  # noqa: ANN001
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.exception_handler(LeaseError)
    async def _lease(request, exc):  # noqa: ANN001
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=423, content={"detail": str(exc)})

    @app.exception_handler(ValidationFailure)
    async def _invalid(request, exc):  # noqa: ANN001
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=422, content={"detail": exc.violations})

    @app.get("/queue")
    def queue(annotator: Optional[str] = Query(default=None)):
        return {"items": store.queue(annotator)}

    @app.get("/items/{item_id}")
    def get_item(item_id: str):
        return _get_or_404(item_id).view()

    @app.post("/items", status_code=201)
    def create_item(body: CreateItemRequest):
        try:
            item = store.create_item(body.id, tuple(body.sample_ids), TaskKind(body.task))
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return item.view()

    @app.post("/items/{item_id}/lease")
    def lease(item_id: str, body: LeaseRequest):
        _get_or_404(item_id)
        ttl = body.ttl if body.ttl is not None else WorkItemStore.DEFAULT_LEASE_SECONDS
        token = store.acquire_lease(item_id, body.annotator, ttl)
        return {"token": token, "item": store.get(item_id).view()}

    @app.post("/items/{item_id}/questionnaire")
    def questionnaire(item_id: str, body: QuestionnaireRequest):
        _get_or_404(item_id)
        item = store.submit_questionnaire(item_id, body.fields, body.token)
        return item.view()

    @app.post("/items/{item_id}/draft")
    def draft(item_id: str, body: TokenRequest):
        item = _get_or_404(item_id)
        if item.questionnaire is None:
            raise IllegalTransition(f"item {item_id} has no questionnaire yet")
        client = _require_judge()
        import json as _json

        bundle = prompts.build_draft_prompt(_json.dumps(item.questionnaire, sort_keys=True))
        try:
            text = client.complete(bundle)
        except TransportError as exc:
            # State intentionally untouched: the step is retryable.
            raise HTTPException(status_code=502, detail=f"draft generation failed: {exc}") from exc
        return store.store_draft(item_id, text, body.token).view()

    @app.post("/items/{item_id}/revision")
    def revision(item_id: str, body: RevisionRequest):
        _get_or_404(item_id)
        return store.submit_revision(item_id, body.text, body.token).view()

    @app.post("/items/{item_id}/variants")
    def variants(item_id: str, body: TokenRequest, k: int = Query(default=3, ge=1, le=10)):
        item = _get_or_404(item_id)
        if item.revision is None:
            raise IllegalTransition(f"item {item_id} has no revision yet")
        client = _require_judge()
        bundle = prompts.build_variant_prompt(item.revision, k)
        try:
            reply = client.complete(bundle)
        except (TransportError, UnparseableVerdict) as exc:
            raise HTTPException(status_code=502, detail=f"variant generation failed: {exc}") from exc
        texts = _parse_variants(reply, k)
        if len(texts) != k:
            raise HTTPException(
                status_code=502,
                detail=f"generator returned {len(texts)} of {k} variants; retry",
            )
        return store.store_variants(item_id, texts, body.token).view()

    @app.post("/items/{item_id}/selection")
    def selection(item_id: str, body: SelectionRequest):
        _get_or_404(item_id)
        try:
            annotation = store.select_variant(item_id, body.index, body.token)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return {"item": store.get(item_id).view(), "annotation": annotation.to_record()}

    return app
