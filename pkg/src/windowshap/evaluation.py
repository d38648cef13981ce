"""Relevance-guided perturbation metrics and the quality-ratio protocol.

Two perturbations degrade an instance at its most relevant cells: inversion
flips a cell v to (row max - v), and interval replacement overwrites a short
window after the cell with the row's original mean. Quality is binary
cross-entropy; each instance's score is the ratio of perturbed to original
loss, reported as mean plus standard error over instances. Relevance is
thresholded at a nearest-rank percentile of the flattened relevance matrix,
and a cell qualifies only when strictly above the threshold.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .domain import Predictor, TimeSeriesInstance, new_instance
from .errors import ConfigError, ShapeMismatch

BCE_EPS = 1e-7
RATIO_GUARD = 1e-12


@dataclass(frozen=True)
class RelevanceMatrix:
    """Per-cell importance scores aligned with an instance's shape."""

    values: np.ndarray
    source: str = "unknown"

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 2:
            raise ShapeMismatch("relevance must be a D x L matrix")
        object.__setattr__(self, "values", arr)


@dataclass(frozen=True)
class EvalReport:
    """Per-instance quality ratios with their mean and standard error."""

    metric: str
    p: float
    n: int | None
    ratios: tuple[float, ...]
    mean: float
    sem: float
    skipped: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "p": self.p,
            "n": self.n,
            "ratios": list(self.ratios),
            "mean": self.mean,
            "sem": self.sem,
            "skipped": list(self.skipped),
        }


def nearest_rank_threshold(values: np.ndarray, p: float) -> float:
    """The p-th percentile by the nearest-rank rule over all entries."""
    if not 0.0 <= p <= 100.0:
        raise ConfigError(f"percentile must be in [0, 100], got {p}")
    flat = np.sort(np.asarray(values, dtype=np.float64).ravel())
    rank = max(1, math.ceil(p / 100.0 * flat.size))
    return float(flat[rank - 1])


def _qualifying(x: TimeSeriesInstance, r: RelevanceMatrix, p: float) -> np.ndarray:
    if r.values.shape != x.shape:
        raise ShapeMismatch(
            f"relevance shape {r.values.shape} != instance shape {x.shape}"
        )
    tau = nearest_rank_threshold(r.values, p)
    return r.values > tau


def perturb_inverse(
    x: TimeSeriesInstance, r: RelevanceMatrix, p: float
) -> TimeSeriesInstance:
    """Flip each qualifying cell v to (row max - v), rows treated independently."""
    mask = _qualifying(x, r, p)
    values = x.values.copy()
    row_max = x.values.max(axis=1, keepdims=True)
    values[mask] = (row_max - x.values)[mask]
    return new_instance(values, x.variable_names, x.step_duration)


def perturb_mean_interval(
    x: TimeSeriesInstance, r: RelevanceMatrix, p: float, n: int
) -> TimeSeriesInstance:
    """Replace [t, t+n] after each qualifying cell with the row's original mean."""
    if n < 0:
        raise ConfigError(f"interval length must be >= 0, got {n}")
    mask = _qualifying(x, r, p)
    values = x.values.copy()
    row_mean = x.values.mean(axis=1)
    length = x.n_steps
    for i, t in zip(*np.nonzero(mask)):
        values[i, t : min(length, t + n + 1)] = row_mean[i]
    return new_instance(values, x.variable_names, x.step_duration)


def bce(pred: float, label: int) -> float:
    """Binary cross-entropy with predictions clamped away from 0 and 1."""
    clamped = min(max(float(pred), BCE_EPS), 1.0 - BCE_EPS)
    if label not in (0, 1):
        raise ConfigError(f"label must be 0 or 1, got {label}")
    return -(label * math.log(clamped) + (1 - label) * math.log(1.0 - clamped))


RelevanceFn = Callable[[TimeSeriesInstance, int], RelevanceMatrix]


def _perturb(x, relevance, metric, p, n):
    if metric == "inverse":
        return perturb_inverse(x, relevance, p)
    if metric == "mean_interval":
        return perturb_mean_interval(x, relevance, p, n)
    raise ConfigError(f"unknown metric {metric!r}")


def evaluate_explainer(
    predictor_source,
    instances: tuple[TimeSeriesInstance, ...],
    labels: tuple[int, ...],
    relevance_fn: RelevanceFn,
    metric: str = "inverse",
    p: float = 90.0,
    n: int = 5,
    jobs: int = 1,
) -> EvalReport:
    """Quality ratio bce(f(perturbed), y) / bce(f(x), y) per instance.

    ``predictor_source`` is a Predictor, or a zero-argument factory producing
    one handle per worker when running with jobs > 1. Instances whose original
    loss is below the division guard are skipped and recorded.
    """
    if len(instances) < 1:
        raise ConfigError("at least one instance is required")
    if len(labels) != len(instances):
        raise ShapeMismatch("labels and instances differ in length")

    def make_predictor() -> Predictor:
        if hasattr(predictor_source, "predict"):
            return predictor_source
        return predictor_source()

    def one(index: int, predictor: Predictor) -> float | None:
        x = instances[index]
        relevance = relevance_fn(x, index)
        perturbed = _perturb(x, relevance, metric, p, n)
        scores = predictor.predict(np.stack([x.values, perturbed.values]))
        denominator = bce(float(scores[0]), labels[index])
        if denominator < RATIO_GUARD:
            return None
        return bce(float(scores[1]), labels[index]) / denominator

    results: list[float | None] = [None] * len(instances)
    if jobs <= 1:
        predictor = make_predictor()
        for index in range(len(instances)):
            results[index] = one(index, predictor)
    else:
        def worker(chunk: list[int]) -> list[tuple[int, float | None]]:
            predictor = make_predictor()
            return [(i, one(i, predictor)) for i in chunk]

        chunks = [list(range(len(instances)))[w::jobs] for w in range(jobs)]
        chunks = [c for c in chunks if c]
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            for pairs in pool.map(worker, chunks):
                for index, ratio in pairs:
                    results[index] = ratio

    ratios = tuple(r for r in results if r is not None)
    skipped = tuple(i for i, r in enumerate(results) if r is None)
    if not ratios:
        raise ConfigError("all instances were skipped by the division guard")
    mean = float(np.mean(ratios))
    sem = float(np.std(ratios, ddof=1) / math.sqrt(len(ratios))) if len(ratios) > 1 else 0.0
    return EvalReport(metric, float(p), n if metric == "mean_interval" else None,
                      ratios, mean, sem, skipped)
