"""Reference in-process implementation of the scorer wire protocol.

Useful for driving the remote-scorer path in tests and demos without a
trained model: POST /score returns one score per sequence from a pluggable
rule (sequence length by default), GET /health reports liveness.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable

MAX_BATCH = 512

ScoreRule = Callable[[str, str], float]


def length_rule(question: str, sequence: str) -> float:
    return float(len(sequence))


def substring_rule(marker: str) -> ScoreRule:
    """1.0 when the marker occurs in the sequence, else 0.0."""

    def rule(question: str, sequence: str) -> float:
        return 1.0 if marker in sequence else 0.0

    return rule


def _make_handler(rule: ScoreRule):
    class Handler(BaseHTTPRequestHandler):
        def _reply(self, status: int, payload: dict):
            body = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self):
            if self.path == "/health":
                self._reply(200, {"status": "ok"})
            else:
                self._reply(404, {"error": "not found"})

        def do_POST(self):
            if self.path != "/score":
                self._reply(404, {"error": "not found"})
                return
            try:
                length = int(self.headers.get("Content-Length", 0))
                payload = json.loads(self.rfile.read(length))
                question = payload["question"]
                sequences = payload["sequences"]
                if not isinstance(question, str) or not isinstance(sequences, list):
                    raise ValueError("bad types")
                if not all(isinstance(s, str) for s in sequences):
                    raise ValueError("bad sequence entry")
            except Exception:
                self._reply(400, {"error": "malformed request body"})
                return
            if not sequences:
                self._reply(400, {"error": "sequences must be non-empty"})
                return
            if len(sequences) > MAX_BATCH:
                self._reply(413, {"error": f"batch exceeds {MAX_BATCH} sequences"})
                return
            self._reply(200, {"scores": [rule(question, s) for s in sequences]})

        def log_message(self, *args):
            pass

    return Handler


class MockScorerServer:
    """Threaded HTTP server speaking the scorer protocol on a free port."""

    def __init__(self, rule: ScoreRule = length_rule, host: str = "127.0.0.1", port: int = 0):
        self._server = ThreadingHTTPServer((host, port), _make_handler(rule))
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "MockScorerServer":
        self._thread.start()
        return self

    def stop(self):
        self._server.shutdown()
        self._server.server_close()

    def __enter__(self) -> "MockScorerServer":
        return self.start()

    def __exit__(self, *exc_info):
        self.stop()
