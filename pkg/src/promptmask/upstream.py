"""Chat-completion wire protocol client and test transports.

The gateway talks to any server exposing POST <base>/v1/chat/completions with
{"model": ..., "messages": [{"role", "content"}], "temperature": ...} and the
reply text in choices[0].message.content. A transport only moves the JSON
payload; complete() owns the envelope shape in both directions.
"""

from __future__ import annotations

import logging

import requests

from .errors import ProtocolError, UpstreamUnavailable

logger = logging.getLogger(__name__)

CHAT_COMPLETIONS_PATH = "/v1/chat/completions"


class HttpTransport:
    """Real HTTP transport; one request per call, no retries."""

    def __init__(self, base_url: str, timeout: float = 60.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def send(self, payload: dict) -> dict:
        url = self.base_url + CHAT_COMPLETIONS_PATH
        try:
            resp = requests.post(url, json=payload, timeout=self.timeout)
        except requests.RequestException as exc:
            raise UpstreamUnavailable(f"upstream unreachable: {exc}") from exc
        if resp.status_code != 200:
            raise UpstreamUnavailable(f"upstream returned HTTP {resp.status_code}", raw=resp.text)
        try:
            return resp.json()
        except ValueError as exc:
            raise ProtocolError("upstream body is not JSON", raw=resp.text) from exc


class EchoTransport:
    """Test stub: answers with the last user message verbatim."""

    def send(self, payload: dict) -> dict:
        content = ""
        for message in payload.get("messages", []):
            if message.get("role") == "user":
                content = message.get("content", "")
        return {"choices": [{"message": {"role": "assistant", "content": content}}]}


class ScriptedTransport:
    """Test stub: replays canned reply bodies in order, then repeats the last."""

    def __init__(self, replies: list[str]):
        self.replies = list(replies)
        self.requests: list[dict] = []

    def send(self, payload: dict) -> dict:
        self.requests.append(payload)
        content = self.replies.pop(0) if len(self.replies) > 1 else self.replies[0]
        return {"choices": [{"message": {"role": "assistant", "content": content}}]}


def complete(transport, model: str, messages: list[tuple[str, str]], temperature: float = 0.0) -> str:
    """One chat-completion round trip; returns the reply text.

    Raises UpstreamUnavailable on transport failure and ProtocolError when the
    response envelope is missing the content field. Never retries: resending a
    prompt multiplies its exposure.
    """
    payload = {
        "model": model,
        "messages": [{"role": role, "content": content} for role, content in messages],
        "temperature": temperature,
    }
    data = transport.send(payload)
    try:
        content = data["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError) as exc:
        raise ProtocolError(f"chat completion envelope malformed: {exc}", raw=repr(data)) from exc
    if not isinstance(content, str):
        raise ProtocolError("chat completion content is not text", raw=repr(data))
    return content


class ChatClient:
    """Transport + model + temperature bound together; the shape detectors and
    the generator expect from an LLM dependency."""

    def __init__(self, transport, model: str, temperature: float = 0.0):
        self.transport = transport
        self.model = model
        self.temperature = temperature

    def complete(self, messages: list[tuple[str, str]]) -> str:
        return complete(self.transport, self.model, messages, self.temperature)


def make_transport(upstream_url: str, timeout: float = 60.0):
    """"echo" builds the loopback stub; anything else is a real base URL."""
    if upstream_url == "echo":
        return EchoTransport()
    return HttpTransport(upstream_url, timeout=timeout)
