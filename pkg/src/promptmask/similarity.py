"""String and vector similarity measures used by the evaluation layer."""

from __future__ import annotations

import logging
import math
import re
from collections import Counter

import requests

from .errors import DimensionMismatch, UpstreamUnavailable

logger = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"\w+", re.UNICODE)


def levenshtein(a: str, b: str) -> int:
    """Minimum single-character edits (insert/delete/substitute) from a to b,
    computed over Unicode scalar values."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i] + [0] * len(b)
        for j, cb in enumerate(b, start=1):
            cur[j] = min(
                prev[j] + 1,          # delete
                cur[j - 1] + 1,       # insert
                prev[j - 1] + (ca != cb),
            )
        prev = cur
    return prev[-1]


def normalized_levenshtein(a: str, b: str) -> float:
    """Edit distance divided by the longer length; 0.0 for two empty strings."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 0.0
    return levenshtein(a, b) / longest


def jaro(a: str, b: str) -> float:
    """Jaro similarity: matching characters within a window of
    floor(max(|a|,|b|)/2) - 1, with transpositions counted as half the
    out-of-order matches."""
    if a == b:
        return 1.0
    la, lb = len(a), len(b)
    if la == 0 or lb == 0:
        return 0.0
    window = max(max(la, lb) // 2 - 1, 0)
    a_matched = [False] * la
    b_matched = [False] * lb
    matches = 0
    for i in range(la):
        lo = max(0, i - window)
        hi = min(lb - 1, i + window)
        for j in range(lo, hi + 1):
            if not b_matched[j] and a[i] == b[j]:
                a_matched[i] = b_matched[j] = True
                matches += 1
                break
    if matches == 0:
        return 0.0
    a_seq = [a[i] for i in range(la) if a_matched[i]]
    b_seq = [b[j] for j in range(lb) if b_matched[j]]
    transpositions = sum(x != y for x, y in zip(a_seq, b_seq)) / 2
    return (matches / la + matches / lb + (matches - transpositions) / matches) / 3


def jaro_winkler(a: str, b: str, prefix_scale: float = 0.1, max_prefix: int = 4) -> float:
    """Jaro with a common-prefix boost: j + l * p * (1 - j), prefix capped at
    max_prefix characters."""
    if not (0.0 <= prefix_scale <= 0.25):
        raise ValueError("prefix_scale must be in [0, 0.25]")
    j = jaro(a, b)
    prefix = 0
    for ca, cb in zip(a, b):
        if ca != cb or prefix >= max_prefix:
            break
        prefix += 1
    return j + prefix * prefix_scale * (1.0 - j)


def cosine_similarity(u, v) -> float:
    """dot(u, v) / (|u| |v|); 0.0 (with a warning) when either vector is zero."""
    if len(u) != len(v):
        raise DimensionMismatch(f"vectors have lengths {len(u)} and {len(v)}")
    dot = 0.0
    nu = 0.0
    nv = 0.0
    for x, y in zip(u, v):
        dot += x * y
        nu += x * x
        nv += y * y
    if nu == 0.0 or nv == 0.0:
        logger.warning("cosine similarity of a zero vector reported as 0.0")
        return 0.0
    return dot / math.sqrt(nu * nv)


class TokenCountEmbedder:
    """Offline embedding fallback: lowercase token counts over the union
    vocabulary of the pair being compared."""

    mode = "token-frequency"

    def embed_pair(self, a: str, b: str) -> tuple[list[float], list[float]]:
        ca = Counter(_TOKEN_RE.findall(a.lower()))
        cb = Counter(_TOKEN_RE.findall(b.lower()))
        vocab = sorted(set(ca) | set(cb))
        return [float(ca[t]) for t in vocab], [float(cb[t]) for t in vocab]


class HttpEmbedder:
    """External sentence-embedding service client.

    POSTs {"texts": [a, b]} to the endpoint and expects
    {"embeddings": [[...], [...]]} with equal dimensionality.
    """

    mode = "external-service"

    def __init__(self, endpoint: str, timeout: float = 60.0):
        self.endpoint = endpoint
        self.timeout = timeout

    def embed_pair(self, a: str, b: str) -> tuple[list[float], list[float]]:
        try:
            resp = requests.post(self.endpoint, json={"texts": [a, b]}, timeout=self.timeout)
        except requests.RequestException as exc:
            raise UpstreamUnavailable(f"embedding service unreachable: {exc}") from exc
        if resp.status_code != 200:
            raise UpstreamUnavailable(f"embedding service returned HTTP {resp.status_code}",
                                      raw=resp.text)
        try:
            emb = resp.json()["embeddings"]
            u, v = emb[0], emb[1]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise UpstreamUnavailable("embedding service reply malformed", raw=resp.text) from exc
        if any(not math.isfinite(x) for vec in (u, v) for x in vec):
            raise UpstreamUnavailable("embedding service returned non-finite components")
        return u, v


def semantic_similarity(a: str, b: str, provider=None) -> float:
    """Cosine similarity between the provider's embeddings of a and b.

    Defaults to the token-frequency fallback, which needs no network and is
    deterministic for identical inputs.
    """
    provider = provider or TokenCountEmbedder()
    u, v = provider.embed_pair(a, b)
    return cosine_similarity(u, v)
