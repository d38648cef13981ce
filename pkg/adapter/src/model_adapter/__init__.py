"""Serve an arbitrary Python model over the batched scoring wire protocol.

The adapter loads a user-supplied callable (``path/to/module.py:name``) that
maps an (N, D, L) array to N scores, and answers wire-protocol requests over
stdin/stdout (newline-delimited JSON) or HTTP POST:

    request:  {"id": <int>, "shape": [D, L], "instances": [[[...] x D] x N]}
    response: {"id": <int>, "predictions": [N reals in [0, 1]]}

Bad requests and model exceptions produce {"id": ..., "error": "..."} and the
server keeps running. Out-of-range scores are clamped into [0, 1] with a
warning rather than rejected: handing logits to a probability-scoring client
is the most common caller mistake and should degrade gracefully.
"""

from .loader import AdapterConfig, load_model
from .server import handle_request, serve_model

__version__ = "0.1.0"

__all__ = ["AdapterConfig", "handle_request", "load_model", "serve_model"]
