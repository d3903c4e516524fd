import json
import sys
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


class StubHandler(BaseHTTPRequestHandler):
    """Model server double.

    /v1/generate answers ``"<model>:<input>"`` per input. /v1/entail returns
    the probability scripted for the hypothesis (0.25 by default); the
    hypotheses "http-500", "bad-json" and "wrong-shape" trigger failures.
    """

    requests: list = []
    probabilities: dict = {}

    def log_message(self, *args):
        pass

    def _send(self, status, body):
        data = body if isinstance(body, bytes) else json.dumps(body).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def do_POST(self):
        raw = self.rfile.read(int(self.headers["Content-Length"]))
        payload = json.loads(raw.decode("utf-8"))
        self.requests.append((self.path, payload, self.headers.get("Content-Type")))
        if self.path == "/v1/generate":
            if any(i == "http-500" for i in payload["inputs"]):
                return self._send(500, {"error": "boom"})
            if any(i == "short" for i in payload["inputs"]):
                return self._send(200, {"outputs": []})
            return self._send(200, {"outputs": [f"{payload['model']}:{i}" for i in payload["inputs"]]})
        if self.path == "/v1/entail":
            hyp = payload["hypothesis"]
            if hyp == "http-500":
                return self._send(500, {"error": "boom"})
            if hyp == "bad-json":
                return self._send(200, b"not json")
            if hyp == "wrong-shape":
                return self._send(200, {"prob": 0.5})
            return self._send(200, {"probability": self.probabilities.get(hyp, 0.25)})
        self._send(404, {"error": "unknown route"})


@pytest.fixture
def stub_server():
    StubHandler.requests = []
    StubHandler.probabilities = {"too-high": 1.5, "negative": -0.1, "certain": 1.0}
    server = ThreadingHTTPServer(("127.0.0.1", 0), StubHandler)
    thread = threading.Thread(target=server.serve_forever, kwargs={"poll_interval": 0.02}, daemon=True)
    thread.start()
    try:
        yield f"http://127.0.0.1:{server.server_address[1]}", StubHandler
    finally:
        server.shutdown()
        server.server_close()


@pytest.fixture
def fixtures_dir():
    return FIXTURES


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
