"""Minimal scoring server speaking the newline-delimited JSON wire protocol.

Used by the test suite as an in-repo external model. Modes:

    constant <value>   every instance scores <value>
    linear <w.json>    sigmoid(bias + sum(weights * instance))
    short-count        returns N-1 predictions for N instances
    out-of-range       returns 1.5 for every instance
    sleepy <secs>      sleeps before answering (timeout tests)
"""

from __future__ import annotations

import json
import sys
import time

import numpy as np


def scores_for(mode: str, arg: str, instances) -> list[float]:
    n = len(instances)
    if mode == "constant":
        return [float(arg)] * n
    if mode == "linear":
        with open(arg, "r", encoding="utf-8") as fh:
            params = json.load(fh)
        weights = np.asarray(params["weights"], dtype=np.float64)
        bias = float(params.get("bias", 0.0))
        out = []
        for inst in instances:
            z = bias + float((weights * np.asarray(inst, dtype=np.float64)).sum())
            out.append(float(1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))))
        return out
    if mode == "short-count":
        return [0.5] * max(0, n - 1)
    if mode == "out-of-range":
        return [1.5] * n
    if mode == "sleepy":
        time.sleep(float(arg))
        return [0.5] * n
    raise SystemExit(f"unknown stub mode {mode!r}")


def main() -> int:
    mode = sys.argv[1]
    arg = sys.argv[2] if len(sys.argv) > 2 else ""
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        request = json.loads(line)
        response = {
            "id": request["id"],
            "predictions": scores_for(mode, arg, request["instances"]),
        }
        sys.stdout.write(json.dumps(response) + "\n")
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
