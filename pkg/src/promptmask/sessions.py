"""Session state and on-disk persistence.

Each session owns one vault and an append-only transcript. A session lives in
its own directory under the configured vault dir:

    <vault_dir>/<session_id>/session.json     id, creation time, detector config
    <vault_dir>/<session_id>/vault.json       the entity dictionary
    <vault_dir>/<session_id>/transcript.jsonl one line per successful dispatch
"""

from __future__ import annotations

import json
import os
import tempfile
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from .detection import EntityMention
from .errors import CorruptVault, NotFound, StorageFailure
from .masking import Vault, load_vault, save_vault, vault_to_dict


@dataclass
class ExchangeRecord:
    prompt: str
    masked_prompt: str
    masked_reply: str
    reply: str
    unresolved: list[str]
    started_at: str
    finished_at: str

    def to_dict(self) -> dict:
        return {
            "prompt": self.prompt,
            "masked_prompt": self.masked_prompt,
            "masked_reply": self.masked_reply,
            "reply": self.reply,
            "unresolved": list(self.unresolved),
            "started_at": self.started_at,
            "finished_at": self.finished_at,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExchangeRecord":
        return cls(
            prompt=data["prompt"],
            masked_prompt=data["masked_prompt"],
            masked_reply=data["masked_reply"],
            reply=data["reply"],
            unresolved=list(data["unresolved"]),
            started_at=data["started_at"],
            finished_at=data["finished_at"],
        )


@dataclass
class PendingMask:
    """The reviewable state between mask_prompt and dispatch."""

    prompt: str
    mentions: list[EntityMention]
    masked_text: str
    mask_hash: str


@dataclass
class Session:
    id: str
    vault: Vault
    detector_config: dict
    created_at: str
    transcript: list[ExchangeRecord] = field(default_factory=list)
    pending: PendingMask | None = None


def _atomic_write(path: Path, payload: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class SessionStore:
    """Directory-backed session persistence."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def _dir(self, session_id: str) -> Path:
        return self.root / session_id

    def create(self, detector_config: dict, created_at: str, session_id: str | None = None) -> Session:
        """Create and persist a fresh session skeleton (empty vault/transcript)."""
        session_id = session_id or uuid.uuid4().hex
        session = Session(
            id=session_id,
            vault=Vault(session_id=session_id),
            detector_config=detector_config,
            created_at=created_at,
        )
        self.save(session)
        return session

    def save(self, session: Session) -> None:
        try:
            directory = self._dir(session.id)
            directory.mkdir(parents=True, exist_ok=True)
            meta = {
                "id": session.id,
                "created_at": session.created_at,
                "detector_config": session.detector_config,
            }
            _atomic_write(directory / "session.json",
                          json.dumps(meta, ensure_ascii=False, indent=2) + "\n")
            save_vault(session.vault, directory / "vault.json")
            lines = [json.dumps(r.to_dict(), ensure_ascii=False, sort_keys=True)
                     for r in session.transcript]
            _atomic_write(directory / "transcript.jsonl",
                          "".join(line + "\n" for line in lines))
        except OSError as exc:
            raise StorageFailure(f"cannot persist session {session.id}: {exc}") from exc

    def load(self, session_id: str) -> Session:
        directory = self._dir(session_id)
        if not directory.is_dir():
            raise NotFound(f"no session {session_id!r}")
        try:
            meta = json.loads((directory / "session.json").read_text(encoding="utf-8"))
            vault = load_vault(directory / "vault.json")
            transcript = []
            transcript_path = directory / "transcript.jsonl"
            if transcript_path.exists():
                for line in transcript_path.read_text(encoding="utf-8").splitlines():
                    if line.strip():
                        transcript.append(ExchangeRecord.from_dict(json.loads(line)))
        except CorruptVault:
            raise
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise StorageFailure(f"cannot load session {session_id!r}: {exc}") from exc
        if vault.session_id != session_id:
            raise CorruptVault(f"vault belongs to {vault.session_id!r}, not {session_id!r}")
        return Session(
            id=meta["id"],
            vault=vault,
            detector_config=meta.get("detector_config", {}),
            created_at=meta.get("created_at", ""),
            transcript=transcript,
        )

    def list_ids(self) -> list[str]:
        if not self.root.is_dir():
            return []
        return sorted(p.name for p in self.root.iterdir() if (p / "session.json").exists())


def vault_file_dict(session: Session) -> dict:
    return vault_to_dict(session.vault)
