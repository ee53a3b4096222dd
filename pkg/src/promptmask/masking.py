"""Reversible placeholder substitution backed by a per-session vault.

The vault is a bidirectional dictionary between placeholder tokens of the
form [LABEL_k] and the (surface, label) pairs they stand for. Within one
vault the same (surface, label) always maps to the same token, so masking is
consistent across every prompt of a session and fully reversible.
"""

from __future__ import annotations

import json
import logging
import os
import re
import tempfile
from dataclasses import dataclass, field

from .detection import PLACEHOLDER_RE, EntityMention
from .errors import CorruptVault, OverlapViolation
from .labels import ALL_LABELS, EntityLabel

logger = logging.getLogger(__name__)

_TOKEN_PARTS_RE = re.compile(r"\[([A-Z][A-Z_]*)_(\d+)\]$")


@dataclass
class VaultEntry:
    placeholder: str
    surface: str
    label: EntityLabel


@dataclass
class Vault:
    """Bidirectional (surface, label) <-> placeholder dictionary for one session."""

    session_id: str
    forward: dict[tuple[str, EntityLabel], str] = field(default_factory=dict)
    reverse: dict[str, tuple[str, EntityLabel]] = field(default_factory=dict)
    counters: dict[EntityLabel, int] = field(
        default_factory=lambda: {label: 1 for label in ALL_LABELS}
    )

    def entries(self) -> list[VaultEntry]:
        """All entries in minting order."""
        return [VaultEntry(tok, surf, label) for tok, (surf, label) in self.reverse.items()]


def placeholder_for(vault: Vault, surface: str, label: EntityLabel) -> str:
    """Return the placeholder for (surface, label), minting one if needed.

    Lookup is exact: the same surface under a different label gets a distinct
    token. Newly minted tokens are [LABEL_k] with k the label's counter, which
    then advances; existing pairs leave the counter untouched.
    """
    if not surface:
        raise ValueError("surface must be non-empty")
    key = (surface, label)
    existing = vault.forward.get(key)
    if existing is not None:
        return existing
    token = f"[{label.name}_{vault.counters[label]}]"
    vault.counters[label] += 1
    vault.forward[key] = token
    vault.reverse[token] = key
    return token


@dataclass
class MaskedEntity:
    """One applied substitution: the mention, its token, and where the token
    landed in the masked text (byte offsets)."""

    mention: EntityMention
    placeholder: str
    masked_start: int
    masked_end: int


@dataclass
class MaskResult:
    masked_text: str
    applied: list[MaskedEntity]
    vault_delta: list[VaultEntry]


def mask(text: str, mentions: list[EntityMention], vault: Vault) -> MaskResult:
    """Replace each mention span with its placeholder in one left-to-right pass.

    Mentions must be sorted and pairwise disjoint (resolve_overlaps output);
    anything else raises OverlapViolation. Bytes outside the spans are
    preserved verbatim, and the vault is extended in place.
    """
    text_bytes = text.encode("utf-8")
    last_end = 0
    for m in mentions:
        if m.start < last_end:
            raise OverlapViolation(
                f"mentions overlap or are unsorted at byte {m.start} (previous end {last_end})"
            )
        if not (0 <= m.start < m.end <= len(text_bytes)):
            raise ValueError(f"mention span {m.start}..{m.end} outside text")
        if text_bytes[m.start:m.end] != m.surface.encode("utf-8"):
            raise ValueError(f"mention surface {m.surface!r} does not match text at span")
        if PLACEHOLDER_RE.search(m.surface):
            raise ValueError(f"mention surface {m.surface!r} contains a placeholder token")
        last_end = m.end

    before = dict(vault.reverse)
    out = bytearray()
    applied: list[MaskedEntity] = []
    cursor = 0
    for m in mentions:
        out += text_bytes[cursor:m.start]
        token = placeholder_for(vault, m.surface, m.label)
        token_bytes = token.encode("utf-8")
        applied.append(MaskedEntity(m, token, len(out), len(out) + len(token_bytes)))
        out += token_bytes
        cursor = m.end
    out += text_bytes[cursor:]
    delta = [VaultEntry(tok, surf, label)
             for tok, (surf, label) in vault.reverse.items() if tok not in before]
    masked_text = out.decode("utf-8")
    # Replaced spans are gone by construction; a replaced surface surviving
    # elsewhere usually means the detector missed an occurrence. Warning only:
    # short surfaces may legitimately occur inside untouched words.
    for surface in {m.surface for m in mentions}:
        if surface in masked_text:
            logger.warning("replaced surface %r still occurs in masked text", surface)
    return MaskResult(masked_text, applied, delta)


@dataclass
class UnmaskResult:
    text: str
    unresolved: list[str]


def unmask(text: str, vault: Vault) -> UnmaskResult:
    """Restore original surfaces for every vault placeholder found in text.

    Scans once, so surfaces brought back in are never rescanned. Placeholder-
    shaped tokens absent from the vault stay verbatim and are reported in
    `unresolved` (first occurrence order, deduplicated).
    """
    unresolved: list[str] = []

    def _swap(match: re.Match) -> str:
        token = match.group(0)
        pair = vault.reverse.get(token)
        if pair is None:
            if token not in unresolved:
                unresolved.append(token)
            return token
        return pair[0]

    return UnmaskResult(PLACEHOLDER_RE.sub(_swap, text), unresolved)


def vault_to_dict(vault: Vault) -> dict:
    return {
        "session_id": vault.session_id,
        "entries": [
            {"placeholder": e.placeholder, "surface": e.surface, "label": e.label.name}
            for e in vault.entries()
        ],
        "counters": {label.name: vault.counters[label] for label in ALL_LABELS},
    }


def vault_from_dict(data: dict) -> Vault:
    """Rebuild a vault from its JSON form, enforcing every invariant."""
    try:
        session_id = data["session_id"]
        raw_entries = data["entries"]
        raw_counters = data["counters"]
    except (KeyError, TypeError) as exc:
        raise CorruptVault(f"missing field: {exc}") from exc

    vault = Vault(session_id=session_id)
    try:
        for label in ALL_LABELS:
            vault.counters[label] = int(raw_counters[label.name])
    except (KeyError, ValueError, TypeError) as exc:
        raise CorruptVault(f"bad counters: {exc}") from exc

    seen_indices: dict[EntityLabel, set[int]] = {label: set() for label in ALL_LABELS}
    for raw in raw_entries:
        try:
            token, surface, label_name = raw["placeholder"], raw["surface"], raw["label"]
            label = EntityLabel[label_name]
        except (KeyError, TypeError) as exc:
            raise CorruptVault(f"bad entry {raw!r}: {exc}") from exc
        m = _TOKEN_PARTS_RE.fullmatch(token)
        if not m or m.group(1) != label.name:
            raise CorruptVault(f"token {token!r} does not match label {label.name}")
        index = int(m.group(2))
        if not (1 <= index < vault.counters[label]):
            raise CorruptVault(f"token {token!r} index outside 1..{vault.counters[label] - 1}")
        key = (surface, label)
        if token in vault.reverse or key in vault.forward:
            raise CorruptVault(f"duplicate mapping for {token!r}")
        vault.forward[key] = token
        vault.reverse[token] = key
        seen_indices[label].add(index)

    for label in ALL_LABELS:
        expected = set(range(1, vault.counters[label]))
        if seen_indices[label] != expected:
            raise CorruptVault(f"{label.name} indices not contiguous from 1")
    return vault


def save_vault(vault: Vault, path: str | os.PathLike) -> None:
    """Write the vault file atomically (temp file + rename)."""
    payload = json.dumps(vault_to_dict(vault), ensure_ascii=False, indent=2) + "\n"
    directory = os.path.dirname(os.fspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".vault-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_vault(path: str | os.PathLike) -> Vault:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CorruptVault(f"vault file is not valid JSON: {exc}") from exc
    return vault_from_dict(data)
