"""Model loading: resolve "path/to/module.py:callable" into a scoring function."""

from __future__ import annotations

import importlib.util
import sys
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class AdapterConfig:
    """What to serve and how: model location, transport, declared shape."""

    model_path: str
    callable_name: str
    shape: tuple[int, int]
    transport: str = "stdio"
    port: int = 8000

    def __post_init__(self):
        if self.transport not in ("stdio", "http"):
            raise ValueError(f"transport must be stdio or http, got {self.transport!r}")
        d, length = self.shape
        if d < 1 or length < 1:
            raise ValueError(f"shape must be at least 1x1, got {self.shape}")


def parse_model_ref(text: str) -> tuple[str, str]:
    """Split "path:callable"; the path may contain drive-letter-free colons only."""
    path, sep, name = text.rpartition(":")
    if not sep or not path or not name:
        raise ValueError(f"model must be given as <file-path>:<callable>, got {text!r}")
    return path, name


def parse_shape(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise ValueError(f"shape must be given as DxL, got {text!r}")
    return int(parts[0]), int(parts[1])


def load_model(config: AdapterConfig):
    """Import the model file and return its scoring callable."""
    path = Path(config.model_path)
    if not path.exists():
        raise FileNotFoundError(f"model file not found: {path}")
    spec = importlib.util.spec_from_file_location("served_model", path)
    module = importlib.util.module_from_spec(spec)
    sys.modules["served_model"] = module
    spec.loader.exec_module(module)
    try:
        model = getattr(module, config.callable_name)
    except AttributeError as exc:
        raise AttributeError(
            f"{path} does not define {config.callable_name!r}"
        ) from exc
    if not callable(model):
        raise TypeError(f"{config.callable_name!r} in {path} is not callable")
    return model
