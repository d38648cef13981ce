from __future__ import annotations

import json
import subprocess
import sys
import time

import pytest

SIGMOID_SUM_MODEL = """\
import numpy as np

def score(batch):
    z = np.asarray(batch, dtype=np.float64).sum(axis=(1, 2))
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500.0, 500.0)))

def mean_score(batch):
    arr = np.asarray(batch, dtype=np.float64)
    return arr.mean(axis=(1, 2))

def logit_score(batch):
    return [3.7] * len(batch)
"""


@pytest.fixture
def model_file(tmp_path):
    path = tmp_path / "served.py"
    path.write_text(SIGMOID_SUM_MODEL)
    return path


class StdioAdapter:
    """Raw stdio client for driving the adapter process in tests."""

    def __init__(self, model_ref: str, shape: str):
        self.proc = subprocess.Popen(
            [sys.executable, "-m", "model_adapter", "serve",
             "--model", model_ref, "--transport", "stdio", "--shape", shape],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
        self._next_id = 0

    def send_raw(self, line: str) -> dict:
        self.proc.stdin.write(line + "\n")
        self.proc.stdin.flush()
        return json.loads(self.proc.stdout.readline())

    def request(self, instances, shape=None, request_id=None) -> dict:
        self._next_id += 1
        payload = {
            "id": self._next_id if request_id is None else request_id,
            "instances": instances,
        }
        if shape is not None:
            payload["shape"] = shape
        return self.send_raw(json.dumps(payload))

    def alive(self) -> bool:
        return self.proc.poll() is None

    def close(self) -> str:
        self.proc.stdin.close()
        try:
            self.proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self.proc.kill()
            self.proc.wait()
        return self.proc.stderr.read()

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()


@pytest.fixture
def stdio_adapter(model_file):
    with StdioAdapter(f"{model_file}:score", "2x3") as adapter:
        yield adapter


def spawn_http_adapter(model_ref: str, shape: str):
    """Start an HTTP adapter on an ephemeral port; returns (process, url)."""
    proc = subprocess.Popen(
        [sys.executable, "-m", "model_adapter", "serve",
         "--model", model_ref, "--transport", "http", "--port", "0",
         "--shape", shape],
        stderr=subprocess.PIPE,
        text=True,
    )
    deadline = time.monotonic() + 10.0
    url = None
    while time.monotonic() < deadline:
        line = proc.stderr.readline()
        if "serving on " in line:
            url = line.split("serving on ", 1)[1].strip()
            break
        if proc.poll() is not None:
            raise RuntimeError("adapter exited before startup")
    if url is None:
        proc.kill()
        raise RuntimeError("adapter did not report its address")
    return proc, url
