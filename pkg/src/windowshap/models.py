"""Built-in synthetic predictors, data generation, and external model clients.

Built-ins are pure functions with analytically known importance structure,
squashed through a sigmoid so scores satisfy the [0, 1] predictor contract.
External predictors speak one wire protocol over either a subprocess's
stdin/stdout (newline-delimited JSON) or HTTP POST:

    request:  {"id": <int>, "shape": [D, L], "instances": [[[...] x D] x N]}
    response: {"id": <int>, "predictions": [N reals in [0, 1]]}

One request carries a whole batch, so engine call accounting matches
transport traffic one-to-one.
"""

from __future__ import annotations

import json
import os
import queue
import subprocess
import threading
from dataclasses import dataclass

import numpy as np
import requests

from .dataio import Dataset
from .domain import new_instance
from .errors import (
    ConfigError,
    ConnectionFailure,
    InvalidWindowLength,
    NonFiniteValue,
    ProtocolViolation,
    ShapeMismatch,
    Timeout,
)

DEFAULT_TIMEOUT_SECS = 30.0
TIMEOUT_ENV_VAR = "WINDOWSHAP_TIMEOUT_SECS"


def sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500.0, 500.0)))


def _check_batch(batch: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    arr = np.asarray(batch, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[1:] != shape:
        raise ShapeMismatch(f"batch shape {arr.shape} incompatible with instance shape {shape}")
    return arr


class LinearPredictor:
    """sigmoid(bias + sum of elementwise weights times cells)."""

    def __init__(self, weights, bias: float = 0.0):
        self.weights = np.asarray(weights, dtype=np.float64)
        if self.weights.ndim != 2:
            raise ShapeMismatch("weights must be a D x L matrix")
        if not np.isfinite(self.weights).all() or not np.isfinite(bias):
            raise NonFiniteValue("weights and bias must be finite")
        self.bias = float(bias)
        self.shape = self.weights.shape

    def predict(self, batch: np.ndarray) -> np.ndarray:
        arr = _check_batch(batch, self.shape)
        return sigmoid(self.bias + np.tensordot(arr, self.weights, axes=([1, 2], [0, 1])))


class RecencyPredictor:
    """Linear score with exponentially decaying weight on older time steps."""

    def __init__(self, shape: tuple[int, int], decay: float):
        self.shape = (int(shape[0]), int(shape[1]))
        self.decay = float(decay)
        length = self.shape[1]
        self._step_weights = np.exp(-self.decay * (length - 1 - np.arange(length)))

    def predict(self, batch: np.ndarray) -> np.ndarray:
        arr = _check_batch(batch, self.shape)
        return sigmoid(np.tensordot(arr, self._step_weights, axes=([2], [0])).sum(axis=1))


class AnomalyPredictor:
    """Detector keyed to variable 0: peak sliding mean against a threshold.

    Variables other than 0 never influence the score, making them dummy
    players by construction.
    """

    def __init__(self, shape: tuple[int, int], window_len: int, threshold: float, gain: float):
        self.shape = (int(shape[0]), int(shape[1]))
        if not 1 <= window_len <= self.shape[1]:
            raise InvalidWindowLength(
                f"detector window {window_len} outside [1, {self.shape[1]}]"
            )
        self.window_len = int(window_len)
        self.threshold = float(threshold)
        self.gain = float(gain)

    def predict(self, batch: np.ndarray) -> np.ndarray:
        arr = _check_batch(batch, self.shape)
        signal = arr[:, 0, :]
        windows = np.lib.stride_tricks.sliding_window_view(signal, self.window_len, axis=1)
        means = windows.mean(axis=2)
        return sigmoid(self.gain * (means.max(axis=1) - self.threshold))


def generate_synthetic(
    kind: str, n_variables: int, n_steps: int, n_instances: int, seed: int
) -> Dataset:
    """Seeded Gaussian-noise instances with optional labeled anomaly bumps.

    Labels alternate 0/1 so draws are balanced. For kind="anomaly", each
    label-1 instance gets an additive bump of amplitude 1.0 over a contiguous
    segment of length floor(L/10) + 1 at a random position in variable 0; the
    segment is recorded as ground truth. kind="smooth" keeps the labels but
    adds no bumps.
    """
    if kind not in ("anomaly", "smooth"):
        raise ConfigError(f"unknown synthetic kind {kind!r}")
    if n_variables < 1 or n_steps < 1 or n_instances < 1:
        raise ConfigError("d, l and n must all be >= 1")
    rng = np.random.default_rng(seed)
    segment_len = n_steps // 10 + 1
    names = tuple(f"v{i}" for i in range(n_variables))
    instances = []
    labels = []
    ground_truth = []
    for index in range(n_instances):
        values = rng.normal(0.0, 0.1, size=(n_variables, n_steps))
        label = index % 2
        segment = None
        if kind == "anomaly" and label == 1:
            start = int(rng.integers(0, n_steps - segment_len + 1))
            values[0, start : start + segment_len] += 1.0
            segment = (0, start, start + segment_len)
        instances.append(new_instance(values, names))
        labels.append(label)
        ground_truth.append(segment)
    meta = {
        "kind": kind,
        "seed": seed,
        "noise_sigma": 0.1,
        "bump_amplitude": 1.0,
        "segment_len": segment_len,
    }
    return Dataset(tuple(instances), tuple(labels), tuple(ground_truth), meta)


def _validate_response(payload: dict, request_id: int, batch_size: int) -> np.ndarray:
    if "error" in payload:
        raise ProtocolViolation(f"server error: {payload['error']}", batch_size)
    if payload.get("id") != request_id:
        raise ProtocolViolation(
            f"response id {payload.get('id')} does not echo request id {request_id}",
            batch_size,
        )
    predictions = payload.get("predictions")
    if not isinstance(predictions, list) or len(predictions) != batch_size:
        got = len(predictions) if isinstance(predictions, list) else type(predictions).__name__
        raise ProtocolViolation(
            f"expected {batch_size} predictions, got {got}", batch_size
        )
    scores = np.asarray(predictions, dtype=np.float64)
    if not np.isfinite(scores).all() or (scores < 0.0).any() or (scores > 1.0).any():
        raise ProtocolViolation("predictions must be finite reals in [0, 1]", batch_size)
    return scores


def configured_timeout(timeout: float | None = None) -> float:
    if timeout is not None:
        return float(timeout)
    env = os.environ.get(TIMEOUT_ENV_VAR)
    return float(env) if env else DEFAULT_TIMEOUT_SECS


class SubprocessPredictor:
    """Client for a scoring process speaking newline-delimited JSON on stdio."""

    def __init__(self, argv: list[str], shape: tuple[int, int], timeout: float | None = None):
        self.shape = (int(shape[0]), int(shape[1]))
        self.timeout = configured_timeout(timeout)
        self._request_id = 0
        self._lock = threading.Lock()
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=None,  # diagnostics pass through
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise ConnectionFailure(f"cannot start {argv!r}: {exc}") from exc
        self._lines: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()
        self._round_trip([])  # health check

    def _read_loop(self) -> None:
        assert self._proc.stdout is not None
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(None)

    def _round_trip(self, instances: list) -> np.ndarray:
        with self._lock:
            self._request_id += 1
            request_id = self._request_id
            request = {"id": request_id, "shape": list(self.shape), "instances": instances}
            if self._proc.poll() is not None:
                raise ConnectionFailure(
                    f"scoring process exited with code {self._proc.returncode}"
                )
            try:
                self._proc.stdin.write(json.dumps(request) + "\n")
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                raise ConnectionFailure(f"cannot write to scoring process: {exc}") from exc
            try:
                line = self._lines.get(timeout=self.timeout)
            except queue.Empty:
                raise Timeout(
                    f"no response within {self.timeout}s for request {request_id}"
                ) from None
            if line is None:
                raise ConnectionFailure("scoring process closed its stdout")
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ProtocolViolation(f"response is not valid JSON: {exc}") from exc
            return _validate_response(payload, request_id, len(instances))

    def predict(self, batch: np.ndarray) -> np.ndarray:
        arr = _check_batch(batch, self.shape)
        return self._round_trip(arr.tolist())

    def close(self) -> None:
        if self._proc.poll() is None:
            self._proc.terminate()
            try:
                self._proc.wait(timeout=3)
            except subprocess.TimeoutExpired:
                self._proc.kill()

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()


class HttpPredictor:
    """Client for a scoring endpoint accepting the wire protocol over POST."""

    def __init__(self, url: str, shape: tuple[int, int], timeout: float | None = None):
        self.url = url
        self.shape = (int(shape[0]), int(shape[1]))
        self.timeout = configured_timeout(timeout)
        self._request_id = 0
        self._lock = threading.Lock()
        self._round_trip([])  # health check

    def _round_trip(self, instances: list) -> np.ndarray:
        with self._lock:
            self._request_id += 1
            request_id = self._request_id
        request = {"id": request_id, "shape": list(self.shape), "instances": instances}
        try:
            response = requests.post(self.url, json=request, timeout=self.timeout)
        except requests.Timeout as exc:
            raise Timeout(f"no response within {self.timeout}s from {self.url}") from exc
        except requests.RequestException as exc:
            raise ConnectionFailure(f"cannot reach {self.url}: {exc}") from exc
        if response.status_code != 200:
            raise ConnectionFailure(f"{self.url} answered HTTP {response.status_code}")
        try:
            payload = response.json()
        except ValueError as exc:
            raise ProtocolViolation(f"response is not valid JSON: {exc}") from exc
        return _validate_response(payload, request_id, len(instances))

    def predict(self, batch: np.ndarray) -> np.ndarray:
        arr = _check_batch(batch, self.shape)
        return self._round_trip(arr.tolist())

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()


@dataclass(frozen=True)
class ModelSpec:
    """Parsed model address: builtin:<kind>@<params-file>, cmd:<argv>, or http:<url>."""

    kind: str
    params_path: str | None = None
    command: tuple[str, ...] | None = None
    url: str | None = None


def parse_model_spec(text: str) -> ModelSpec:
    if text.startswith("builtin:"):
        rest = text[len("builtin:") :]
        if "@" not in rest:
            raise ConfigError(
                f"builtin model spec needs a params file: builtin:<kind>@<file>, got {text!r}"
            )
        kind, params_path = rest.split("@", 1)
        if kind not in ("linear", "recency", "anomaly"):
            raise ConfigError(f"unknown builtin model kind {kind!r}")
        return ModelSpec(kind=f"builtin-{kind}", params_path=params_path)
    if text.startswith("cmd:"):
        argv = text[len("cmd:") :].split()
        if not argv:
            raise ConfigError("cmd: model spec has an empty command line")
        return ModelSpec(kind="external-cmd", command=tuple(argv))
    if text.startswith(("http://", "https://")):
        return ModelSpec(kind="external-http", url=text)
    if text.startswith("http:"):
        return ModelSpec(kind="external-http", url=text[len("http:") :])
    raise ConfigError(f"cannot parse model spec {text!r}")


def build_predictor(spec: ModelSpec, shape: tuple[int, int], timeout: float | None = None):
    """Instantiate the predictor a spec describes, validated against a shape."""
    if spec.kind.startswith("builtin-"):
        with open(spec.params_path, "r", encoding="utf-8") as fh:
            params = json.load(fh)
        if spec.kind == "builtin-linear":
            predictor = LinearPredictor(params["weights"], params.get("bias", 0.0))
            if predictor.shape != tuple(shape):
                raise ShapeMismatch(
                    f"weights shape {predictor.shape} != data shape {tuple(shape)}"
                )
            return predictor
        if spec.kind == "builtin-recency":
            return RecencyPredictor(shape, params["decay"])
        return AnomalyPredictor(
            shape, params["window_len"], params["threshold"], params["gain"]
        )
    if spec.kind == "external-cmd":
        return SubprocessPredictor(list(spec.command), shape, timeout)
    return HttpPredictor(spec.url, shape, timeout)
