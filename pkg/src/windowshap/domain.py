"""Core data types: instances, backgrounds, windows, attributions, predictors.

All types are immutable after construction and safe to share across threads.
Matrices are variable-major: row = variable, column = time step. Time indices
are 0-based everywhere, including file formats.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np

from .errors import (
    DuplicateVariableName,
    IncompleteCoverage,
    NonFiniteValue,
    OverlappingWindows,
    ShapeMismatch,
)

DISTRIBUTION_TOL = 1e-12


def _as_readonly_matrix(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeMismatch(f"expected a 2-D variable-by-time matrix, got ndim={arr.ndim}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TimeSeriesInstance:
    """A D x L real matrix with one row per variable."""

    values: np.ndarray
    variable_names: tuple[str, ...]
    step_duration: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", _as_readonly_matrix(self.values))
        object.__setattr__(self, "variable_names", tuple(self.variable_names))
        d, length = self.values.shape
        if d < 1 or length < 1:
            raise ShapeMismatch(f"instance must be at least 1x1, got {d}x{length}")
        if len(self.variable_names) != d:
            raise ShapeMismatch(
                f"{len(self.variable_names)} variable names for {d} matrix rows"
            )
        if len(set(self.variable_names)) != d:
            raise DuplicateVariableName(f"variable names not unique: {self.variable_names}")
        if not np.isfinite(self.values).all():
            raise NonFiniteValue("instance contains NaN or infinite values")

    @property
    def n_variables(self) -> int:
        return self.values.shape[0]

    @property
    def n_steps(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def new_instance(values, variable_names, step_duration: str | None = None) -> TimeSeriesInstance:
    """Validated constructor for a time-series instance."""
    return TimeSeriesInstance(values, tuple(variable_names), step_duration)


@dataclass(frozen=True)
class BackgroundSet:
    """Reference instances whose values realize absent cells."""

    instances: tuple[TimeSeriesInstance, ...]

    def __post_init__(self):
        object.__setattr__(self, "instances", tuple(self.instances))
        if not self.instances:
            raise ShapeMismatch("background set must contain at least one instance")
        shape = self.instances[0].shape
        for inst in self.instances[1:]:
            if inst.shape != shape:
                raise ShapeMismatch(
                    f"background shapes differ: {inst.shape} vs {shape}"
                )
        stacked = np.stack([inst.values for inst in self.instances])
        stacked.setflags(write=False)
        object.__setattr__(self, "_stacked", stacked)

    @property
    def size(self) -> int:
        return len(self.instances)

    @property
    def shape(self) -> tuple[int, int]:
        return self.instances[0].shape

    def stacked(self) -> np.ndarray:
        """All instances as one (B, D, L) array (read-only view)."""
        return self._stacked


@dataclass(frozen=True)
class Window:
    """One variable index plus an ordered set of time-step indices."""

    variable: int
    time_steps: tuple[int, ...]

    def __post_init__(self):
        steps = tuple(sorted(int(t) for t in self.time_steps))
        if not steps:
            raise ShapeMismatch("window must contain at least one time step")
        if len(set(steps)) != len(steps):
            raise ShapeMismatch(f"window time steps contain duplicates: {steps}")
        object.__setattr__(self, "variable", int(self.variable))
        object.__setattr__(self, "time_steps", steps)

    def __len__(self) -> int:
        return len(self.time_steps)

    @property
    def is_contiguous(self) -> bool:
        return self.time_steps[-1] - self.time_steps[0] + 1 == len(self.time_steps)

    @property
    def start(self) -> int:
        return self.time_steps[0]

    @property
    def end(self) -> int:
        """Exclusive end for contiguous windows."""
        if not self.is_contiguous:
            raise ShapeMismatch("end is only defined for contiguous windows")
        return self.time_steps[-1] + 1


def contiguous_window(variable: int, start: int, end: int) -> Window:
    """Window covering [start, end)."""
    return Window(variable, tuple(range(start, end)))


@dataclass(frozen=True)
class WindowSet:
    """The full player set: windows across all variables of a (D, L) grid."""

    windows: tuple[Window, ...]
    shape: tuple[int, int]
    partition: bool = False

    def __post_init__(self):
        object.__setattr__(self, "windows", tuple(self.windows))
        object.__setattr__(self, "shape", (int(self.shape[0]), int(self.shape[1])))
        d, length = self.shape
        for w in self.windows:
            if not 0 <= w.variable < d:
                raise ShapeMismatch(f"window variable {w.variable} outside [0, {d})")
            if w.time_steps[0] < 0 or w.time_steps[-1] >= length:
                raise ShapeMismatch(
                    f"window steps {w.time_steps} outside [0, {length}) for variable {w.variable}"
                )
        validate_window_set(self, require_partition=self.partition)

    def __len__(self) -> int:
        return len(self.windows)

    def per_variable(self) -> dict[int, list[Window]]:
        by_var: dict[int, list[Window]] = {}
        for w in self.windows:
            by_var.setdefault(w.variable, []).append(w)
        return by_var


def validate_window_set(ws: WindowSet, require_partition: bool = False) -> None:
    """Check per-variable disjointness, and full coverage when required.

    Raises OverlappingWindows or IncompleteCoverage; returns None when valid.
    """
    d, length = ws.shape
    for variable in range(d):
        seen: set[int] = set()
        for w in ws.windows:
            if w.variable != variable:
                continue
            for t in w.time_steps:
                if t in seen:
                    raise OverlappingWindows(variable, t)
                seen.add(t)
        if require_partition:
            missing = set(range(length)) - seen
            if missing:
                raise IncompleteCoverage(variable, tuple(sorted(missing)))


@runtime_checkable
class Predictor(Protocol):
    """Opaque batched scorer: N instances of shape (D, L) in, N reals in [0, 1] out.

    Implementations must be deterministic: identical batches yield identical
    outputs.
    """

    shape: tuple[int, int]

    def predict(self, batch: np.ndarray) -> np.ndarray:
        """Score a (N, D, L) batch, returning a length-N array."""
        ...


@dataclass(frozen=True)
class Attribution:
    """Per-cell Shapley values together with the window values they came from.

    ``meta`` records the algorithm, its parameters, the seed, and the
    efficiency regime: ``meta["efficiency"]`` is ``"exact"`` when the base
    value plus all point values must reproduce the prediction (within
    ``meta["efficiency_tolerance"]``), or ``"approximate"`` when only the
    residual is reported (overlapping-window averaging cannot preserve it).
    """

    base_value: float
    point_values: np.ndarray
    window_values: tuple[tuple[Window, float], ...]
    prediction: float
    meta: dict

    def __post_init__(self):
        object.__setattr__(self, "point_values", _as_readonly_matrix(self.point_values))
        object.__setattr__(
            self, "window_values", tuple((w, float(v)) for w, v in self.window_values)
        )
        if not np.isfinite(self.point_values).all():
            raise NonFiniteValue("attribution contains non-finite point values")
        if self.meta.get("efficiency", "exact") == "exact":
            tol = float(self.meta.get("efficiency_tolerance", 1e-6))
            residual = self.efficiency_residual
            if abs(residual) > tol:
                raise NonFiniteValue(
                    f"attribution violates local accuracy: residual {residual:.3e} > {tol:.0e}"
                )
            for w, value in self.window_values:
                cells = self.point_values[w.variable, list(w.time_steps)]
                if abs(float(cells.sum()) - value) > DISTRIBUTION_TOL:
                    raise NonFiniteValue(
                        f"window value {value} not preserved by its cells (sum {cells.sum()})"
                    )

    @property
    def efficiency_residual(self) -> float:
        return float(self.base_value + self.point_values.sum() - self.prediction)

    @property
    def shape(self) -> tuple[int, int]:
        return self.point_values.shape
