"""File formats: instance CSV, multi-instance JSON, attribution JSON.

A single-instance CSV stores the transpose of the internal matrix: the header
row holds variable names and each subsequent row is one time step (L rows by
D columns). Multi-instance and background files are JSON objects
``{"variables": [...], "instances": [[[...L reals...] x D] x N]}`` with
optional ``labels``, ``ground_truth`` and ``meta`` keys. Floats are written
with ``repr`` so round-trips are bit-identical.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .domain import Attribution, BackgroundSet, TimeSeriesInstance, Window, new_instance
from .errors import ShapeMismatch


def write_json(obj, path) -> None:
    """Deterministic JSON writer: sorted keys, two-space indent, trailing newline."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def read_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def save_instance_csv(instance: TimeSeriesInstance, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(instance.variable_names)
        for t in range(instance.n_steps):
            writer.writerow([repr(float(v)) for v in instance.values[:, t]])


def load_instance_csv(path) -> TimeSeriesInstance:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise ShapeMismatch(f"{path}: expected a header row plus at least one time step")
    names = rows[0]
    steps = []
    for row in rows[1:]:
        if len(row) != len(names):
            raise ShapeMismatch(
                f"{path}: row has {len(row)} cells for {len(names)} variables"
            )
        steps.append([float(v) for v in row])
    return new_instance(np.array(steps, dtype=np.float64).T, names)


@dataclass(frozen=True)
class Dataset:
    """A batch of same-shape instances, optionally labeled."""

    instances: tuple[TimeSeriesInstance, ...]
    labels: tuple[int, ...] | None = None
    ground_truth: tuple | None = None
    meta: dict | None = None

    def __post_init__(self):
        if not self.instances:
            raise ShapeMismatch("dataset must contain at least one instance")
        if self.labels is not None and len(self.labels) != len(self.instances):
            raise ShapeMismatch("labels and instances differ in length")

    @property
    def variable_names(self) -> tuple[str, ...]:
        return self.instances[0].variable_names


def save_dataset_json(dataset: Dataset, path) -> None:
    obj = {
        "variables": list(dataset.variable_names),
        "instances": [inst.values.tolist() for inst in dataset.instances],
    }
    if dataset.labels is not None:
        obj["labels"] = list(dataset.labels)
    if dataset.ground_truth is not None:
        obj["ground_truth"] = [
            None if seg is None else {"variable": seg[0], "start": seg[1], "end": seg[2]}
            for seg in dataset.ground_truth
        ]
    if dataset.meta is not None:
        obj["meta"] = dataset.meta
    write_json(obj, path)


def load_dataset_json(path) -> Dataset:
    obj = read_json(path)
    names = obj["variables"]
    instances = tuple(new_instance(values, names) for values in obj["instances"])
    labels = tuple(int(v) for v in obj["labels"]) if "labels" in obj else None
    ground_truth = None
    if "ground_truth" in obj:
        ground_truth = tuple(
            None if seg is None else (seg["variable"], seg["start"], seg["end"])
            for seg in obj["ground_truth"]
        )
    return Dataset(instances, labels, ground_truth, obj.get("meta"))


def load_background_json(path) -> BackgroundSet:
    return BackgroundSet(load_dataset_json(path).instances)


def load_single_instance(path) -> TimeSeriesInstance:
    """Load one instance from a .csv file or the first entry of a dataset .json."""
    text = str(path)
    if text.endswith(".json"):
        return load_dataset_json(path).instances[0]
    return load_instance_csv(path)


def attribution_to_dict(attr: Attribution) -> dict:
    windows = []
    for w, value in attr.window_values:
        if not w.is_contiguous:
            raise ShapeMismatch("only contiguous windows are serializable as [start, end)")
        windows.append(
            {"variable": w.variable, "start": w.start, "end": w.end, "value": value}
        )
    return {
        "meta": attr.meta,
        "base_value": attr.base_value,
        "prediction": attr.prediction,
        "windows": windows,
        "point_values": attr.point_values.tolist(),
    }


def attribution_from_dict(obj: dict) -> Attribution:
    windows = tuple(
        (Window(w["variable"], tuple(range(w["start"], w["end"]))), float(w["value"]))
        for w in obj["windows"]
    )
    return Attribution(
        base_value=float(obj["base_value"]),
        point_values=np.array(obj["point_values"], dtype=np.float64),
        window_values=windows,
        prediction=float(obj["prediction"]),
        meta=obj["meta"],
    )


def save_attribution_json(attr: Attribution, path) -> None:
    write_json(attribution_to_dict(attr), path)


def load_attribution_json(path) -> Attribution:
    return attribution_from_dict(read_json(path))


def point_values_csv_text(variable_names, point_values: np.ndarray) -> str:
    """Point values as CSV: one row per variable, leading name column."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["variable"] + [f"t{t}" for t in range(point_values.shape[1])])
    for name, row in zip(variable_names, point_values):
        writer.writerow([name] + [repr(float(v)) for v in row])
    return buffer.getvalue()
