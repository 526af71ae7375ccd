"""LLM inference access.

The live client speaks the OpenAI-compatible chat-completion wire format:
``POST {endpoint}/chat/completions`` with a bearer token, response text read
from ``choices[0].message.content``. For tests and demos a stub mode replays
canned responses from a script file, either in-process or over HTTP through
``StubInferenceServer``.

Script file format: responses separated by lines containing only ``---``,
served in order; the final response repeats once the script is exhausted.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import httpx

from . import errors


def load_script(path: str | Path) -> list[str]:
    chunks: list[str] = []
    current: list[str] = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip() == "---":
            chunks.append("\n".join(current).strip())
            current = []
        else:
            current.append(line)
    tail = "\n".join(current).strip()
    if tail:
        chunks.append(tail)
    return [c for c in chunks if c]


class HttpInferenceClient:
    """Single chat-completion call; retry policy lives with the caller."""

    def __init__(self, timeout_seconds: float = 60.0,
                 transport: httpx.BaseTransport | None = None):
        self.timeout_seconds = timeout_seconds
        self._client = httpx.Client(timeout=timeout_seconds, transport=transport)

    def complete(self, endpoint_url: str, api_key: str, model: str,
                 messages: list[dict], max_tokens: int = 256) -> str:
        url = endpoint_url.rstrip("/") + "/chat/completions"
        headers = {"Content-Type": "application/json"}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        body = {"model": model, "messages": messages, "max_tokens": max_tokens}
        try:
            response = self._client.post(url, headers=headers, json=body)
        except httpx.TimeoutException:
            raise errors.InferenceTimeout(
                f"no completion within {self.timeout_seconds}s")
        except httpx.HTTPError as exc:
            raise errors.InferenceHttpError(0, f"transport failure: {exc}")
        if response.status_code // 100 != 2:
            raise errors.InferenceHttpError(response.status_code)
        try:
            payload = response.json()
            text = payload["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError):
            raise errors.InferenceMalformedResponse(
                "completion missing choices[0].message.content")
        if not isinstance(text, str):
            raise errors.InferenceMalformedResponse("completion content is not text")
        return text

    def close(self) -> None:
        self._client.close()


class ScriptedInferenceClient:
    """In-process stand-in replaying scripted responses (inference.mode=stub)."""

    def __init__(self, responses: list[str]):
        if not responses:
            raise errors.ValidationError("stub script holds no responses")
        self.responses = list(responses)
        self.calls: list[dict] = []
        self._cursor = 0
        self._lock = threading.Lock()

    @classmethod
    def from_script(cls, path: str | Path) -> "ScriptedInferenceClient":
        return cls(load_script(path))

    def complete(self, endpoint_url: str, api_key: str, model: str,
                 messages: list[dict], max_tokens: int = 256) -> str:
        with self._lock:
            self.calls.append({"endpoint_url": endpoint_url, "model": model,
                               "messages": messages})
            index = min(self._cursor, len(self.responses) - 1)
            self._cursor += 1
            return self.responses[index]

    def close(self) -> None:
        pass


class StubInferenceServer:
    """Tiny HTTP server answering /chat/completions from a response script."""

    def __init__(self, responses: list[str], host: str = "127.0.0.1", port: int = 0):
        self.responses = list(responses)
        self.requests: list[dict] = []
        self._cursor = 0
        self._lock = threading.Lock()
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):                                    # noqa: N802
                length = int(self.headers.get("Content-Length", 0))
                raw = self.rfile.read(length)
                if not self.path.endswith("/chat/completions"):
                    self.send_error(404)
                    return
                try:
                    request_body = json.loads(raw)
                except ValueError:
                    self.send_error(400)
                    return
                with stub._lock:
                    stub.requests.append({
                        "body": request_body,
                        "authorization": self.headers.get("Authorization", ""),
                    })
                    index = min(stub._cursor, len(stub.responses) - 1)
                    stub._cursor += 1
                    text = stub.responses[index]
                payload = json.dumps({
                    "choices": [{"message": {"role": "assistant", "content": text}}],
                }).encode("utf-8")
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

            def log_message(self, *args):
                pass

        self._server = ThreadingHTTPServer((host, port), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @classmethod
    def from_script(cls, path: str | Path, **kwargs) -> "StubInferenceServer":
        return cls(load_script(path), **kwargs)

    @property
    def base_url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}/v1"

    def start(self) -> "StubInferenceServer":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()

    def __enter__(self) -> "StubInferenceServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()
