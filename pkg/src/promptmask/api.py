"""Operator-facing HTTP API around the gateway.

Endpoints (all JSON):
    POST /v1/sessions                      -> {"id": ...}
    POST /v1/sessions/{id}/mask           {"prompt"} -> masked text, mentions,
                                           vault delta, and the review hash
    POST /v1/sessions/{id}/dispatch       {"mask_hash", "edits"} -> replies
    GET  /v1/sessions/{id}/vault
    GET  /v1/sessions/{id}/transcript

Errors are returned as {"code", "message"}. Per-session operations are
serialized behind a lock; distinct sessions run concurrently. Shutdown
flushes every live session to disk.
"""

from __future__ import annotations

import logging
import threading
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .config import GatewayConfig
from .errors import (
    CorruptVault,
    InvalidEdit,
    MalformedReply,
    NotFound,
    PromptMaskError,
    ProtocolError,
    StaleMask,
    StorageFailure,
    UnknownLabel,
    UpstreamUnavailable,
)
from .gateway import Gateway, MentionEdit
from .masking import vault_to_dict
from .sessions import Session

logger = logging.getLogger(__name__)

_STATUS = {
    NotFound: 404,
    StaleMask: 409,
    InvalidEdit: 400,
    UnknownLabel: 400,
    UpstreamUnavailable: 502,
    ProtocolError: 502,
    MalformedReply: 502,
    StorageFailure: 500,
    CorruptVault: 500,
}


class MaskRequest(BaseModel):
    prompt: str


class EditModel(BaseModel):
    action: str
    start: int
    end: int
    label: str | None = None


class DispatchRequest(BaseModel):
    mask_hash: str
    edits: list[EditModel] = Field(default_factory=list)


class SessionRegistry:
    """Live sessions plus their per-session locks."""

    def __init__(self, gateway: Gateway):
        self.gateway = gateway
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def create(self) -> Session:
        session = self.gateway.create_session()
        with self._registry_lock:
            self._sessions[session.id] = session
            self._locks[session.id] = threading.Lock()
        return session

    def acquire(self, session_id: str) -> tuple[Session, threading.Lock]:
        with self._registry_lock:
            if session_id not in self._sessions:
                session = self.gateway.load_session(session_id)  # raises NotFound
                self._sessions[session_id] = session
                self._locks[session_id] = threading.Lock()
            return self._sessions[session_id], self._locks[session_id]

    def flush(self) -> None:
        with self._registry_lock:
            for session in self._sessions.values():
                try:
                    self.gateway.store.save(session)
                except StorageFailure:
                    logger.exception("failed to flush session %s", session.id)


def create_app(config: GatewayConfig | None = None, gateway: Gateway | None = None) -> FastAPI:
    config = config or GatewayConfig().validate()
    gateway = gateway or Gateway(config)
    registry = SessionRegistry(gateway)

    @asynccontextmanager
    async def lifespan(_: FastAPI):
        yield
        registry.flush()

    app = FastAPI(title="promptmask gateway", lifespan=lifespan)
    app.state.registry = registry
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(PromptMaskError)
    async def _domain_error(_: Request, exc: PromptMaskError):
        status = _STATUS.get(type(exc), 500)
        return JSONResponse(status_code=status,
                            content={"code": type(exc).__name__, "message": str(exc)})

    @app.post("/v1/sessions")
    def create_session():
        session = registry.create()
        return {"id": session.id}

    @app.post("/v1/sessions/{session_id}/mask")
    def mask_prompt(session_id: str, body: MaskRequest):
        session, lock = registry.acquire(session_id)
        with lock:
            outcome = gateway.mask_prompt(session, body.prompt)
        placeholders = {a.mention.span: a.placeholder for a in outcome.result.applied}
        return {
            "masked_text": outcome.result.masked_text,
            "mentions": [
                {
                    "surface": m.surface,
                    "label": m.label.name,
                    "start": m.start,
                    "end": m.end,
                    "source": m.source,
                    "placeholder": placeholders.get(m.span),
                }
                for m in outcome.mentions
            ],
            "vault_delta": [
                {"placeholder": e.placeholder, "surface": e.surface, "label": e.label.name}
                for e in outcome.result.vault_delta
            ],
            "mask_hash": outcome.mask_hash,
        }

    @app.post("/v1/sessions/{session_id}/dispatch")
    def dispatch(session_id: str, body: DispatchRequest):
        session, lock = registry.acquire(session_id)
        edits = [MentionEdit(e.action, e.start, e.end, e.label) for e in body.edits]
        with lock:
            outcome = gateway.dispatch(session, body.mask_hash, edits)
        return {
            "masked_reply": outcome.masked_reply,
            "reply": outcome.reply,
            "unresolved": outcome.unresolved,
        }

    @app.get("/v1/sessions/{session_id}/vault")
    def get_vault(session_id: str):
        session, lock = registry.acquire(session_id)
        with lock:
            return vault_to_dict(session.vault)

    @app.get("/v1/sessions/{session_id}/transcript")
    def get_transcript(session_id: str):
        session, lock = registry.acquire(session_id)
        with lock:
            return {"records": [r.to_dict() for r in session.transcript]}

    return app
