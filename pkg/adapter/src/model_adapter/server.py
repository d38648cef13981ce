"""Request handling and the stdio / HTTP serving loops."""

from __future__ import annotations

import json
import logging
import sys
import traceback
from http.server import BaseHTTPRequestHandler, HTTPServer

import numpy as np

from .loader import AdapterConfig, load_model

log = logging.getLogger("model_adapter")


def _score(model, shape: tuple[int, int], payload: dict) -> list[float]:
    request_shape = payload.get("shape")
    if request_shape is not None and tuple(request_shape) != tuple(shape):
        raise ValueError(f"request shape {request_shape} != served shape {list(shape)}")
    instances = payload["instances"]
    batch = np.asarray(instances, dtype=np.float64)
    if batch.size == 0:
        return []
    if batch.ndim != 3 or batch.shape[1:] != tuple(shape):
        raise ValueError(
            f"instances have shape {batch.shape}, expected (N, {shape[0]}, {shape[1]})"
        )
    scores = np.asarray(model(batch), dtype=np.float64).reshape(-1)
    if scores.shape != (batch.shape[0],):
        raise ValueError(
            f"model returned {scores.shape[0]} scores for {batch.shape[0]} instances"
        )
    if not np.isfinite(scores).all():
        raise ValueError("model returned non-finite scores")
    if (scores < 0.0).any() or (scores > 1.0).any():
        log.warning(
            "clamping %d out-of-range scores into [0, 1]; "
            "the model may be emitting logits instead of probabilities",
            int(((scores < 0.0) | (scores > 1.0)).sum()),
        )
        scores = np.clip(scores, 0.0, 1.0)
    return [float(s) for s in scores]


def handle_request(model, shape: tuple[int, int], raw: str | bytes) -> dict:
    """One request in, one response out; errors become {"id", "error"} payloads."""
    request_id = None
    try:
        payload = json.loads(raw)
        request_id = payload.get("id")
        return {"id": request_id, "predictions": _score(model, shape, payload)}
    except Exception as exc:  # the serving loop must survive any request
        detail = "".join(traceback.format_exception_only(type(exc), exc)).strip()
        if not isinstance(exc, (ValueError, KeyError, json.JSONDecodeError, TypeError)):
            detail = f"{detail}\n{traceback.format_exc()}"
        return {"id": request_id, "error": detail}


def serve_stdio(model, shape: tuple[int, int]) -> None:
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        response = handle_request(model, shape, line)
        sys.stdout.write(json.dumps(response) + "\n")
        sys.stdout.flush()


def serve_http(model, shape: tuple[int, int], port: int) -> None:
    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            length = int(self.headers.get("Content-Length", 0))
            response = handle_request(model, shape, self.rfile.read(length))
            body = json.dumps(response).encode()
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def log_message(self, *args):
            pass

    server = HTTPServer(("127.0.0.1", port), Handler)
    log.info("serving on http://127.0.0.1:%d", server.server_address[1])
    server.serve_forever()


def serve_model(config: AdapterConfig) -> None:
    """Load the configured model and serve requests until interrupted."""
    logging.basicConfig(stream=sys.stderr, level=logging.INFO)
    model = load_model(config)
    if config.transport == "stdio":
        serve_stdio(model, config.shape)
    else:
        serve_http(model, config.shape, config.port)
