"""Window construction for the three explanation strategies.

Pure functions over immutable inputs. A fixed tiling covers each variable
with contiguous windows of one length (the trailing window may be shorter);
a sliding plan enumerates overlapping window offsets plus an optional tail
window so every step is covered; split states drive threshold-based
refinement by inserting midpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .domain import WindowSet, contiguous_window
from .errors import InvalidStride, InvalidWindowLength, UnsplittableWindow


def stationary_partition(n_variables: int, n_steps: int, window_len: int) -> WindowSet:
    """Tile every variable with contiguous windows of ``window_len`` steps.

    Produces ceil(n_steps / window_len) windows per variable; the last one is
    shorter when the series length is not divisible by the window length.
    """
    if not 1 <= window_len <= n_steps:
        raise InvalidWindowLength(
            f"window length {window_len} outside [1, {n_steps}]"
        )
    count = math.ceil(n_steps / window_len)
    windows = [
        contiguous_window(i, k * window_len, min(n_steps, (k + 1) * window_len))
        for i in range(n_variables)
        for k in range(count)
    ]
    return WindowSet(tuple(windows), (n_variables, n_steps), partition=True)


@dataclass(frozen=True)
class SlidingPlan:
    """Start offsets of equal-length windows swept across a series."""

    series_len: int
    window_len: int
    stride: int
    offsets: tuple[int, ...]
    tail_offset: int | None

    def all_offsets(self) -> tuple[int, ...]:
        if self.tail_offset is None:
            return self.offsets
        return self.offsets + (self.tail_offset,)

    def covering_offsets(self, t: int) -> tuple[int, ...]:
        """Offsets whose window [o, o + window_len) contains step t."""
        return tuple(o for o in self.all_offsets() if o <= t < o + self.window_len)


def sliding_plan(n_steps: int, window_len: int, stride: int) -> SlidingPlan:
    """Regular offsets {0, s, 2s, ...}, plus a tail window when they leave a gap.

    The regular offset count is floor((L - l) / s) + 1; if the last regular
    window ends before the series does, one extra window anchored at L - l is
    appended so every step receives a value.
    """
    if not 1 <= window_len <= n_steps:
        raise InvalidWindowLength(
            f"window length {window_len} outside [1, {n_steps}]"
        )
    if stride < 1:
        raise InvalidStride(f"stride must be >= 1, got {stride}")
    if stride > window_len:
        raise InvalidStride(
            f"stride {stride} larger than window length {window_len} leaves steps uncovered"
        )
    n_regular = (n_steps - window_len) // stride + 1
    offsets = tuple(j * stride for j in range(n_regular))
    tail = None
    if offsets[-1] + window_len < n_steps:
        tail = n_steps - window_len
    return SlidingPlan(n_steps, window_len, stride, offsets, tail)


@dataclass(frozen=True)
class SplitState:
    """Per-variable split points; window k of a variable is [points[k], points[k+1])."""

    points: tuple[tuple[int, ...], ...]
    series_len: int
    iteration: int = 0

    def __post_init__(self):
        for var_points in self.points:
            if var_points[0] != 0 or var_points[-1] != self.series_len:
                raise InvalidWindowLength(
                    f"split points must start at 0 and end at {self.series_len}"
                )
            if any(b <= a for a, b in zip(var_points, var_points[1:])):
                raise InvalidWindowLength(f"split points not strictly increasing: {var_points}")

    @classmethod
    def initial(cls, n_variables: int, n_steps: int) -> SplitState:
        return cls(tuple((0, n_steps) for _ in range(n_variables)), n_steps)

    @property
    def n_variables(self) -> int:
        return len(self.points)

    def window_count(self) -> int:
        return sum(len(p) - 1 for p in self.points)

    def windows(self) -> WindowSet:
        """Current windows as a partition, ordered by (variable, start)."""
        windows = [
            contiguous_window(i, a, b)
            for i, var_points in enumerate(self.points)
            for a, b in zip(var_points, var_points[1:])
        ]
        return WindowSet(tuple(windows), (self.n_variables, self.series_len), partition=True)


def split_window(state: SplitState, variable: int, k: int) -> SplitState:
    """Split window k of a variable at the floor midpoint of its boundaries."""
    var_points = state.points[variable]
    if not 0 <= k < len(var_points) - 1:
        raise InvalidWindowLength(f"variable {variable} has no window {k}")
    a, b = var_points[k], var_points[k + 1]
    if b - a < 2:
        raise UnsplittableWindow(f"window [{a}, {b}) of variable {variable} has length 1")
    mid = (a + b) // 2
    new_points = tuple(sorted(var_points + (mid,)))
    points = state.points[:variable] + (new_points,) + state.points[variable + 1 :]
    return SplitState(points, state.series_len, state.iteration)
