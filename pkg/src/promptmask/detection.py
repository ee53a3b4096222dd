"""PII detection backends and span bookkeeping.

Three interchangeable detectors produce EntityMention lists over the same
text: a deterministic pattern detector (gazetteer + regex rules), a one-shot
prompted chat LLM, and an external NER HTTP service. resolve_overlaps merges
their output into a conflict-free, sorted mention list.

All spans are byte offsets into the UTF-8 encoding of the source text; this
keeps positions unambiguous under multi-byte characters and matches the NER
service wire schema.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass

import requests

from .errors import InvalidRule, MalformedReply, SpanMismatch, UpstreamUnavailable
from .labels import ALL_LABELS, EntityLabel, canonical_label

logger = logging.getLogger(__name__)

# Shape of every placeholder token the masking layer mints. Mention surfaces
# must never contain one, or masking would nest tokens.
PLACEHOLDER_RE = re.compile(r"\[[A-Z][A-Z_]*_\d+\]")

SOURCE_PATTERN = "pattern"
SOURCE_LLM = "llm"
SOURCE_NER_SERVICE = "ner-service"
SOURCE_MANUAL = "manual"

# Lower rank wins ties in resolve_overlaps.
_SOURCE_RANK = {
    SOURCE_MANUAL: 0,
    SOURCE_NER_SERVICE: 1,
    SOURCE_LLM: 2,
    SOURCE_PATTERN: 3,
}


@dataclass(frozen=True)
class EntityMention:
    """One detected entity occurrence.

    `start`/`end` form a half-open byte range into the UTF-8 encoding of the
    source text; the bytes at that range equal `surface` encoded.
    """

    surface: str
    label: EntityLabel
    start: int
    end: int
    source: str

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


@dataclass
class RawLlmEntityList:
    """(surface, label_spelling) pairs exactly as parsed from a detector LLM
    reply, before span localization or label canonicalization."""

    pairs: list[tuple[str, str]]


def byte_offset_table(text: str) -> list[int]:
    """Prefix table mapping character index -> byte offset; length len(text)+1."""
    offsets = [0] * (len(text) + 1)
    pos = 0
    for i, ch in enumerate(text):
        offsets[i] = pos
        pos += len(ch.encode("utf-8"))
    offsets[len(text)] = pos
    return offsets


def validate_mention(text_bytes: bytes, mention: EntityMention) -> bool:
    """True when the mention's byte span reproduces its surface exactly."""
    if not (0 <= mention.start < mention.end <= len(text_bytes)):
        return False
    return text_bytes[mention.start:mention.end] == mention.surface.encode("utf-8")


def locate_spans(text: str, surface: str) -> list[tuple[int, int]]:
    """All non-overlapping occurrences of surface in text, as byte ranges.

    Scans leftmost-first and case-sensitive; when nothing matches, retries
    case-insensitively over character boundaries. May return an empty list.
    """
    if not surface:
        raise ValueError("surface must be non-empty")
    table = byte_offset_table(text)
    char_spans = []
    pos = 0
    while True:
        idx = text.find(surface, pos)
        if idx < 0:
            break
        char_spans.append((idx, idx + len(surface)))
        pos = idx + len(surface)
    if not char_spans:
        pattern = re.compile(re.escape(surface), re.IGNORECASE)
        char_spans = [m.span() for m in pattern.finditer(text)]
    return [(table[s], table[e]) for s, e in char_spans]


def detect_pattern(
    text: str,
    gazetteer: dict[EntityLabel, list[str]],
    rules: dict[EntityLabel, str],
) -> list[EntityMention]:
    """Deterministic offline detector: exact gazetteer lookup plus regex rules.

    Gazetteer surfaces match case-sensitively; each surface and each rule
    contributes its non-overlapping occurrences. Overlaps between different
    surfaces or rules are left for resolve_overlaps. Output is sorted by
    (start, end). Raises InvalidRule when a rule regex does not compile.
    """
    compiled = {}
    for label, pattern in rules.items():
        try:
            compiled[label] = re.compile(pattern)
        except re.error as exc:
            raise InvalidRule(label.name, pattern, str(exc)) from exc

    table = byte_offset_table(text)
    mentions = []
    for label, surfaces in gazetteer.items():
        for surface in surfaces:
            if not surface:
                raise ValueError(f"empty gazetteer surface under {label.name}")
            pos = 0
            while True:
                idx = text.find(surface, pos)
                if idx < 0:
                    break
                candidate = _mention(text, table, idx, idx + len(surface), label, SOURCE_PATTERN)
                if candidate is not None:
                    mentions.append(candidate)
                pos = idx + len(surface)
    for label, pattern in compiled.items():
        for m in pattern.finditer(text):
            if m.start() == m.end():
                continue
            candidate = _mention(text, table, m.start(), m.end(), label, SOURCE_PATTERN)
            if candidate is not None:
                mentions.append(candidate)
    mentions.sort(key=lambda m: (m.start, m.end, m.label.name))
    return mentions


def _mention(text, table, char_start, char_end, label, source):
    surface = text[char_start:char_end]
    if PLACEHOLDER_RE.search(surface):
        # Surfaces containing placeholder tokens are never valid mentions;
        # this also makes re-detection over already-masked text a no-op.
        logger.debug("dropping placeholder-shaped candidate %r", surface)
        return None
    return EntityMention(surface, label, table[char_start], table[char_end], source)


def load_gazetteer_file(path) -> tuple[dict[EntityLabel, list[str]], dict[EntityLabel, str]]:
    """Read a UTF-8 JSON file of shape {"gazetteer": {label: [surface,...]},
    "rules": {label: regex}} into (gazetteer, rules) keyed by EntityLabel."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    gazetteer = {canonical_label(k): list(v) for k, v in data.get("gazetteer", {}).items()}
    rules = {canonical_label(k): v for k, v in data.get("rules", {}).items()}
    return gazetteer, rules


# One-shot instruction under which a general chat model performs PII NER.
DEFAULT_NER_SYSTEM_PROMPT = (
    "You are a Named Entity Recognition bot. \n"
    'Given a paragraph, you identify entity labels: ["person", "case_number", '
    '"date_of_birth", "address", "company", "tax ID", "location", "date", '
    '"law office", "nationality"]\n'
    "Dont provide any explanations or comments, only use the given text to detect entities.\n"
    "\n"
    'Example: For given text "My name is John Doe, I live in London.", output should be:\n'
    "{\n"
    '    "entities": [\n'
    '        "John Doe": "person",\n'
    '        "London": "location"\n'
    "    ]\n"
    "}\n"
    "\n"
    "The output must be strictly in JSON format as follows:\n"
    "{{\n"
    '    "entities": [\n'
    '        {"<entity_name>": "<entity_label>"},\n'
    '        {"<entity_name>": "<entity_label>"},\n'
    "        ...\n"
    "    ]\n"
    "}}"
)

_FENCE_RE = re.compile(r"```(?:[a-zA-Z0-9_-]+)?\s*\n?(.*?)```", re.DOTALL)


def parse_entity_reply(raw: str) -> RawLlmEntityList:
    """Parse a detector LLM reply into ordered (surface, label) pairs.

    Accepted shapes, tried in order:
      (a) {"entities": [{surface: label}, ...]} — array of single-key objects;
      (b) {"entities": {surface: label, ...}} — flat object map;
      (c) the first well-formed JSON object found inside markdown fences or
          surrounding prose, re-read with (a) then (b).

    Label spellings pass through unmodified. Raises MalformedReply when every
    attempt fails; the exception carries the raw reply for audit.
    """
    candidates = [raw]
    for m in _FENCE_RE.finditer(raw):
        candidates.append(m.group(1))
    brace = _first_json_object(raw)
    if brace is not None:
        candidates.append(brace)
    for candidate in candidates:
        try:
            data = json.loads(candidate.strip())
        except (json.JSONDecodeError, ValueError):
            continue
        pairs = _pairs_from_entities(data)
        if pairs is not None:
            return RawLlmEntityList(pairs)
    raise MalformedReply("no parseable entity list in reply", raw=raw)


def serialize_entity_reply(pairs: list[tuple[str, str]]) -> str:
    """Render pairs in shape (a); inverse of parse_entity_reply for that shape."""
    return json.dumps({"entities": [{s: l} for s, l in pairs]}, ensure_ascii=False)


def _first_json_object(text: str) -> str | None:
    start = text.find("{")
    while start >= 0:
        depth = 0
        in_string = False
        escaped = False
        for i in range(start, len(text)):
            ch = text[i]
            if in_string:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == '"':
                    in_string = False
            elif ch == '"':
                in_string = True
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    return text[start:i + 1]
        start = text.find("{", start + 1)
    return None


def _pairs_from_entities(data) -> list[tuple[str, str]] | None:
    if not isinstance(data, dict) or "entities" not in data:
        return None
    entities = data["entities"]
    if isinstance(entities, list):
        pairs = []
        for item in entities:
            if not (isinstance(item, dict) and len(item) == 1):
                return None
            (surface, label), = item.items()
            if not (isinstance(surface, str) and isinstance(label, str)):
                return None
            pairs.append((surface, label))
        return pairs
    if isinstance(entities, dict):
        pairs = []
        for surface, label in entities.items():
            if not isinstance(label, str):
                return None
            pairs.append((surface, label))
        return pairs
    return None


def detect_llm(text: str, llm, system_prompt: str = DEFAULT_NER_SYSTEM_PROMPT) -> list[EntityMention]:
    """Detect entities with a one-shot prompted chat model.

    `llm` is any chat client exposing complete(messages) -> reply text (see
    upstream.ChatClient). The reply is parsed with parse_entity_reply and each
    pair is localized with locate_spans. Pairs whose surface never occurs in
    the text, and pairs with labels outside the closed set, are dropped with
    a warning rather than failing the whole detection.

    Raises UpstreamUnavailable on transport failure and MalformedReply when
    the reply cannot be parsed; both carry the raw reply.
    """
    reply = llm.complete([("system", system_prompt), ("user", text)])
    parsed = parse_entity_reply(reply)
    table_bytes = text.encode("utf-8")
    mentions: list[EntityMention] = []
    seen = set()
    for surface, spelling in parsed.pairs:
        if not surface:
            logger.warning("detector llm returned an empty surface; dropped")
            continue
        try:
            label = canonical_label(spelling)
        except Exception:
            logger.warning("detector llm returned unknown label %r for %r; dropped", spelling, surface)
            continue
        spans = locate_spans(text, surface)
        if not spans:
            logger.warning("detector llm surface %r not found in text; dropped", surface)
            continue
        for start, end in spans:
            actual = table_bytes[start:end].decode("utf-8")
            if PLACEHOLDER_RE.search(actual):
                continue
            key = (start, end, label)
            if key in seen:
                continue
            seen.add(key)
            mentions.append(EntityMention(actual, label, start, end, SOURCE_LLM))
    mentions.sort(key=lambda m: (m.start, m.end, m.label.name))
    return mentions


def detect_ner_service(
    text: str,
    endpoint: str,
    labels: list[EntityLabel] | None = None,
    timeout: float = 60.0,
    extra: dict | None = None,
) -> list[EntityMention]:
    """Detect entities via an external NER HTTP service.

    POSTs {"text": ..., "labels": [spelling, ...]} and expects
    {"entities": [{"text", "label", "start", "end"}]} with byte offsets.
    `extra` is passed through in the request body untouched (e.g. a
    server-side confidence threshold). Every returned span is validated
    against the text; SpanMismatch names the first offending entity.
    """
    labels = list(labels) if labels is not None else list(ALL_LABELS)
    payload = {"text": text, "labels": [l.spelling for l in labels]}
    if extra:
        payload.update(extra)
    try:
        resp = requests.post(endpoint, json=payload, timeout=timeout)
    except requests.RequestException as exc:
        raise UpstreamUnavailable(f"NER service unreachable: {exc}") from exc
    if resp.status_code != 200:
        raise UpstreamUnavailable(
            f"NER service returned HTTP {resp.status_code}", raw=resp.text
        )
    try:
        body = resp.json()
        entities = body["entities"]
    except (ValueError, KeyError, TypeError) as exc:
        raise UpstreamUnavailable("NER service reply is not the expected JSON shape",
                                  raw=resp.text) from exc

    text_bytes = text.encode("utf-8")
    mentions = []
    for ent in entities:
        surface = ent["text"]
        start, end = int(ent["start"]), int(ent["end"])
        if text_bytes[start:end] != surface.encode("utf-8"):
            got = text_bytes[max(start, 0):max(end, 0)].decode("utf-8", "replace")
            raise SpanMismatch(
                f"service span {start}..{end} reads {got!r}, not {surface!r}"
            )
        if PLACEHOLDER_RE.search(surface):
            continue
        mentions.append(EntityMention(surface, canonical_label(ent["label"]), start, end,
                                      SOURCE_NER_SERVICE))
    mentions.sort(key=lambda m: (m.start, m.end, m.label.name))
    return mentions


def resolve_overlaps(mentions: list[EntityMention]) -> list[EntityMention]:
    """Merge mentions from any mix of detectors into a non-overlapping list.

    When two mentions overlap the longer span wins; ties go to the earlier
    start, then to source priority (manual > ner-service > llm > pattern),
    then to label name. Deterministic for any input permutation, and
    idempotent. All mentions must reference the same source text.
    """
    ordered = sorted(
        set(mentions),
        key=lambda m: (-(m.end - m.start), m.start, _SOURCE_RANK.get(m.source, len(_SOURCE_RANK)), m.label.name),
    )
    kept: list[EntityMention] = []
    for m in ordered:
        if all(m.end <= k.start or k.end <= m.start for k in kept):
            kept.append(m)
    kept.sort(key=lambda m: (m.start, m.end))
    return kept
