import pytest

from promptmask.errors import ProtocolError, UpstreamUnavailable
from promptmask.upstream import (
    ChatClient,
    EchoTransport,
    HttpTransport,
    ScriptedTransport,
    complete,
    make_transport,
)

from conftest import http_stub


def test_complete_returns_scripted_body():
    transport = ScriptedTransport(["fixed body"])
    assert complete(transport, "m", [("user", "hi")]) == "fixed body"


def test_complete_sends_wire_shape():
    transport = ScriptedTransport(["ok"])
    complete(transport, "model-x", [("system", "s"), ("user", "u")], temperature=0.25)
    payload = transport.requests[0]
    assert payload == {
        "model": "model-x",
        "messages": [
            {"role": "system", "content": "s"},
            {"role": "user", "content": "u"},
        ],
        "temperature": 0.25,
    }


def test_missing_content_is_protocol_error():
    class Broken:
        def send(self, payload):
            return {"choices": [{"message": {"role": "assistant"}}]}

    with pytest.raises(ProtocolError):
        complete(Broken(), "m", [("user", "hi")])


def test_non_string_content_is_protocol_error():
    class Broken:
        def send(self, payload):
            return {"choices": [{"message": {"content": 42}}]}

    with pytest.raises(ProtocolError):
        complete(Broken(), "m", [("user", "hi")])


def test_echo_transport_returns_last_user_message():
    reply = complete(EchoTransport(), "m", [("system", "sys"), ("user", "one"), ("user", "two")])
    assert reply == "two"


def test_http_transport_round_trip():
    def responder(body, path):
        assert path == "/v1/chat/completions"
        assert body["model"] == "m"
        return 200, {"choices": [{"message": {"content": "served"}}]}

    with http_stub(responder) as url:
        assert complete(HttpTransport(url), "m", [("user", "hi")]) == "served"


def test_http_500_is_upstream_unavailable():
    def responder(body, path):
        return 500, {"error": "boom"}

    with http_stub(responder) as url:
        with pytest.raises(UpstreamUnavailable):
            complete(HttpTransport(url), "m", [("user", "hi")])


def test_unreachable_host_is_upstream_unavailable():
    with pytest.raises(UpstreamUnavailable):
        complete(HttpTransport("http://127.0.0.1:2", timeout=0.5), "m", [("user", "hi")])


def test_chat_client_binds_model_and_temperature():
    transport = ScriptedTransport(["ok"])
    ChatClient(transport, "bound-model", temperature=0.7).complete([("user", "x")])
    assert transport.requests[0]["model"] == "bound-model"
    assert transport.requests[0]["temperature"] == 0.7


def test_make_transport_echo_keyword():
    assert isinstance(make_transport("echo"), EchoTransport)
    assert isinstance(make_transport("http://example.invalid"), HttpTransport)
