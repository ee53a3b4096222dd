import contextlib
import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from promptmask.synthgen import build_dataset


@contextlib.contextmanager
def http_stub(responder):
    """Serve POST requests on a random local port.

    `responder` maps the decoded JSON body to (status_code, payload_dict).
    Yields the base URL.
    """

    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            length = int(self.headers.get("Content-Length", "0"))
            body = json.loads(self.rfile.read(length) or b"{}")
            status, payload = responder(body, self.path)
            data = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def log_message(self, *args):
            pass

    server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield f"http://127.0.0.1:{server.server_port}"
    finally:
        server.shutdown()
        server.server_close()


@pytest.fixture(scope="session")
def seed7_dataset():
    """The reference corpus used across evaluation and acceptance tests."""
    records, manifest = build_dataset(50, 7, "offline")
    return records, manifest


class RecordingTransport:
    """Wraps a transport and keeps every outbound payload for inspection."""

    def __init__(self, inner):
        self.inner = inner
        self.payloads = []

    def send(self, payload):
        self.payloads.append(json.dumps(payload, ensure_ascii=False))
        return self.inner.send(payload)
