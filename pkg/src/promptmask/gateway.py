"""Mask -> review -> dispatch -> unmask orchestration.

The gateway never auto-forwards: mask_prompt produces a reviewable result and
a hash; dispatch only sends after being handed that hash back, optionally with
reviewer edits, so nothing edited after review can leak unmasked.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from datetime import datetime, timezone

from .config import GatewayConfig
from .detection import (
    EntityMention,
    PLACEHOLDER_RE,
    SOURCE_MANUAL,
    detect_llm,
    detect_ner_service,
    detect_pattern,
    load_gazetteer_file,
    resolve_overlaps,
)
from .errors import InvalidEdit, StaleMask
from .labels import canonical_label
from .masking import MaskResult, Vault, mask, unmask
from .sessions import ExchangeRecord, PendingMask, Session, SessionStore
from .upstream import ChatClient, complete, make_transport

logger = logging.getLogger(__name__)


def mask_hash_of(masked_text: str) -> str:
    return hashlib.sha256(masked_text.encode("utf-8")).hexdigest()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def build_detector(config: GatewayConfig):
    """Compile the configured detector selection into one callable
    text -> mention list. Hybrid runs every backend that has configuration
    and leaves conflict resolution to resolve_overlaps."""
    backends = []
    if config.detector in ("pattern", "hybrid"):
        if config.gazetteer_path:
            gazetteer, rules = load_gazetteer_file(config.gazetteer_path)
        else:
            gazetteer, rules = {}, {}
        if config.detector == "pattern" or gazetteer or rules:
            backends.append(lambda text: detect_pattern(text, gazetteer, rules))
    if config.detector in ("llm", "hybrid") and config.detector_llm_url:
        client = ChatClient(
            make_transport(config.detector_llm_url, timeout=config.timeout_seconds),
            config.detector_llm_model,
            temperature=float(config.detector_params.get("temperature", 0.0)),
        )
        backends.append(lambda text: detect_llm(text, client))
    if config.detector in ("ner-service", "hybrid") and config.ner_endpoint:
        extra = {k: v for k, v in config.detector_params.items() if k != "temperature"}
        backends.append(lambda text: detect_ner_service(
            text, config.ner_endpoint, timeout=config.timeout_seconds, extra=extra or None))
    if not backends:
        raise ValueError(f"detector {config.detector!r} has no configured backend")

    def run(text: str) -> list[EntityMention]:
        found: list[EntityMention] = []
        for backend in backends:
            found.extend(backend(text))
        return found

    return run


@dataclass
class MaskOutcome:
    result: MaskResult
    mentions: list[EntityMention]
    mask_hash: str


@dataclass
class DispatchOutcome:
    masked_prompt: str
    masked_reply: str
    reply: str
    unresolved: list[str]


@dataclass
class MentionEdit:
    """One reviewer adjustment applied before dispatch."""

    action: str  # add | remove | relabel
    start: int
    end: int
    label: str | None = None


class Gateway:
    """Session-scoped pipeline front. Callers serialize operations per
    session; distinct sessions are independent."""

    def __init__(self, config: GatewayConfig, store: SessionStore | None = None,
                 detector=None, transport=None):
        self.config = config
        self.store = store or SessionStore(config.vault_dir)
        self.detector = detector or build_detector(config)
        self.transport = transport or make_transport(config.upstream_url, config.timeout_seconds)

    def create_session(self, session_id: str | None = None) -> Session:
        return self.store.create(self.config.detector_snapshot(), _now(), session_id)

    def load_session(self, session_id: str) -> Session:
        return self.store.load(session_id)

    def mask_prompt(self, session: Session, prompt: str) -> MaskOutcome:
        """Detect, resolve, and mask; returns everything the review step needs.

        Does not dispatch. Detector failures propagate before anything is sent
        anywhere, so a failing detector never exposes the prompt.
        """
        if self.config.per_prompt_vault_reset:
            session.vault = Vault(session_id=session.id)
        mentions = resolve_overlaps(self.detector(prompt))
        result = mask(prompt, mentions, session.vault)
        digest = mask_hash_of(result.masked_text)
        session.pending = PendingMask(prompt, mentions, result.masked_text, digest)
        self.store.save(session)
        return MaskOutcome(result, mentions, digest)

    def dispatch(self, session: Session, mask_hash: str, edits: list[MentionEdit] | None = None) -> DispatchOutcome:
        """Apply reviewer edits, send the final masked prompt upstream, and
        unmask the reply. Appends one transcript record on success only."""
        pending = session.pending
        if pending is None or pending.mask_hash != mask_hash:
            raise StaleMask("mask hash does not match the pending masked prompt")

        mentions = _apply_edits(pending.prompt, pending.mentions, edits or [])
        result = mask(pending.prompt, mentions, session.vault)

        started = _now()
        masked_reply = complete(self.transport, self.config.model,
                                [("user", result.masked_text)],
                                temperature=self.config.temperature)
        unmasked = unmask(masked_reply, session.vault)

        session.transcript.append(ExchangeRecord(
            prompt=pending.prompt,
            masked_prompt=result.masked_text,
            masked_reply=masked_reply,
            reply=unmasked.text,
            unresolved=list(unmasked.unresolved),
            started_at=started,
            finished_at=_now(),
        ))
        session.pending = None
        self.store.save(session)
        return DispatchOutcome(result.masked_text, masked_reply, unmasked.text, unmasked.unresolved)


def _apply_edits(prompt: str, mentions: list[EntityMention], edits: list[MentionEdit]) -> list[EntityMention]:
    prompt_bytes = prompt.encode("utf-8")
    current = {m.span: m for m in mentions}
    for edit in edits:
        span = (edit.start, edit.end)
        if edit.action == "remove":
            if span not in current:
                raise InvalidEdit(f"no mention at span {span} to remove")
            del current[span]
        elif edit.action == "relabel":
            if span not in current:
                raise InvalidEdit(f"no mention at span {span} to relabel")
            if not edit.label:
                raise InvalidEdit("relabel requires a label")
            old = current[span]
            current[span] = EntityMention(old.surface, canonical_label(edit.label),
                                          old.start, old.end, old.source)
        elif edit.action == "add":
            if not edit.label:
                raise InvalidEdit("add requires a label")
            if not (0 <= edit.start < edit.end <= len(prompt_bytes)):
                raise InvalidEdit(f"span {span} outside the prompt")
            try:
                surface = prompt_bytes[edit.start:edit.end].decode("utf-8")
            except UnicodeDecodeError:
                raise InvalidEdit(f"span {span} splits a character") from None
            if PLACEHOLDER_RE.search(surface):
                raise InvalidEdit("added span covers a placeholder token")
            current[span] = EntityMention(surface, canonical_label(edit.label),
                                          edit.start, edit.end, SOURCE_MANUAL)
        else:
            raise InvalidEdit(f"unknown edit action {edit.action!r}")
    return resolve_overlaps(list(current.values()))
