"""Reversible PII masking gateway for LLM prompts.

Detects PII in prompt text, replaces it with consistent [LABEL_k] placeholder
tokens backed by a per-session vault, forwards only masked text upstream, and
restores the original entities in replies. Ships a synthetic legal-prompt
generator with exact gold annotations and an entity-level evaluation harness.
"""

from .config import GatewayConfig, load_config
from .detection import (
    DEFAULT_NER_SYSTEM_PROMPT,
    EntityMention,
    detect_llm,
    detect_ner_service,
    detect_pattern,
    locate_spans,
    parse_entity_reply,
    resolve_overlaps,
)
from .evaluation import (
    EvalReport,
    match_entities,
    precision_recall_f1,
    run_evaluation,
)
from .gateway import Gateway, MentionEdit
from .labels import ALL_LABELS, EntityLabel, canonical_label
from .masking import (
    MaskResult,
    UnmaskResult,
    Vault,
    load_vault,
    mask,
    placeholder_for,
    save_vault,
    unmask,
)
from .similarity import (
    cosine_similarity,
    jaro,
    jaro_winkler,
    levenshtein,
    normalized_levenshtein,
    semantic_similarity,
)
from .synthgen import EntityBundle, SyntheticRecord, build_dataset
from .upstream import ChatClient, EchoTransport, HttpTransport, complete

__version__ = "0.1.0"
