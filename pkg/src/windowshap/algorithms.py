"""The three window-based explainers.

Each maps (predictor, instance, background, parameters) to an Attribution:

* stationary: one game over a fixed tiling of every variable's time axis;
* sliding: one game per window offset, splitting each variable into the
  cells inside the window and the cells outside it, then averaging the
  inside values over all offsets covering a cell;
* dynamic: threshold-driven refinement, repeatedly splitting windows whose
  absolute value exceeds the threshold until convergence or a window budget.

Stationary and dynamic preserve local accuracy (base value plus all point
values equals the prediction); sliding's overlap averaging cannot, so its
attributions are flagged approximate and the residual is reported.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domain import (
    Attribution,
    BackgroundSet,
    Predictor,
    TimeSeriesInstance,
    Window,
    WindowSet,
    contiguous_window,
)
from .engine import (
    DEFAULT_EXACT_THRESHOLD,
    CallCounter,
    GameResult,
    GameSpec,
    play_game,
    resolve_mode,
)
from .errors import ConfigError, ShapeMismatch
from .windowing import SplitState, sliding_plan, split_window, stationary_partition

EXACT_GAME_TOL = 1e-9
KERNEL_GAME_TOL = 1e-6


@dataclass(frozen=True)
class EngineParams:
    """How each Shapley game is solved: mode policy, budget, seed."""

    mode: str = "auto"
    n_samples: int | None = None
    seed: int | tuple[int, ...] = 0
    exact_threshold: int = DEFAULT_EXACT_THRESHOLD

    def __post_init__(self):
        if self.mode not in ("auto", "exact", "kernel"):
            raise ConfigError(f"unknown engine mode {self.mode!r}")
        if self.n_samples is not None and self.n_samples < 1:
            raise ConfigError("n_samples must be >= 1")

    def as_dict(self) -> dict:
        return {
            "mode": self.mode,
            "n_samples": self.n_samples,
            "exact_threshold": self.exact_threshold,
        }


@dataclass(frozen=True)
class StationaryParams:
    window_len: int
    engine: EngineParams = field(default_factory=EngineParams)

    def __post_init__(self):
        if self.window_len < 1:
            raise ConfigError("window length must be >= 1")


@dataclass(frozen=True)
class SlidingParams:
    window_len: int
    stride: int
    engine: EngineParams = field(default_factory=EngineParams)

    def __post_init__(self):
        if self.window_len < 1:
            raise ConfigError("window length must be >= 1")
        if self.stride < 1:
            raise ConfigError("stride must be >= 1")


@dataclass(frozen=True)
class DynamicParams:
    threshold: float
    max_windows: int
    engine: EngineParams = field(default_factory=EngineParams)

    def __post_init__(self):
        if self.threshold < 0:
            raise ConfigError("threshold must be >= 0")
        if self.max_windows < 1:
            raise ConfigError("max_windows must be >= 1")


class _GameRunner:
    """Plays successive games with derived seeds and aggregates accounting."""

    def __init__(
        self,
        predictor: Predictor,
        x_star: TimeSeriesInstance,
        background: BackgroundSet,
        engine: EngineParams,
    ):
        self.predictor = predictor
        self.x_star = x_star
        self.background = background
        self.engine = engine
        self.counter = CallCounter()
        self.games: list[dict] = []
        self._index = 0

    def play(self, players: WindowSet) -> GameResult:
        mode = resolve_mode(self.engine.mode, len(players), self.engine.exact_threshold)
        base = self.engine.seed
        parts = tuple(base) if isinstance(base, (tuple, list)) else (base,)
        game = GameSpec(
            predictor=self.predictor,
            x_star=self.x_star,
            background=self.background,
            players=players,
            mode=mode,
            n_samples=self.engine.n_samples,
            seed=(*parts, self._index),
            exact_threshold=self.engine.exact_threshold,
        )
        self._index += 1
        result = play_game(game)
        self.counter.merge(result.counter)
        self.games.append(
            {
                "players": len(players),
                "mode": result.mode,
                "coalition_evals": result.coalition_evals,
                "sample_count": result.sample_count,
                "predictor_calls": result.counter.predictor_calls,
                "instances_scored": result.counter.instances_scored,
            }
        )
        return result

    def meta(self, algorithm: str, params: dict, extra: dict | None = None) -> dict:
        seed = self.engine.seed
        meta = {
            "algorithm": algorithm,
            "params": {**params, "engine": self.engine.as_dict()},
            "seed": list(seed) if isinstance(seed, (tuple, list)) else seed,
            "variable_names": list(self.x_star.variable_names),
            "games": self.games,
            "predictor_calls": self.counter.predictor_calls,
            "instances_scored": self.counter.instances_scored,
        }
        if extra:
            meta.update(extra)
        return meta


def _distribute(windows, phi, shape) -> np.ndarray:
    """Spread each window's value equally over its cells."""
    points = np.zeros(shape)
    for window, value in zip(windows, phi):
        points[window.variable, list(window.time_steps)] = value / len(window)
    return points


def _check_shapes(x_star: TimeSeriesInstance, background: BackgroundSet) -> None:
    if x_star.shape != background.shape:
        raise ShapeMismatch(
            f"instance shape {x_star.shape} != background shape {background.shape}"
        )


def stationary_windowshap(
    predictor: Predictor,
    x_star: TimeSeriesInstance,
    background: BackgroundSet,
    params: StationaryParams,
) -> Attribution:
    """One Shapley game over a fixed tiling of each variable's time axis."""
    _check_shapes(x_star, background)
    d, length = x_star.shape
    windows = stationary_partition(d, length, params.window_len)
    runner = _GameRunner(predictor, x_star, background, params.engine)
    result = runner.play(windows)
    points = _distribute(windows.windows, result.phi, (d, length))
    tol = EXACT_GAME_TOL if result.mode == "exact" else KERNEL_GAME_TOL
    residual = float(result.base_value + points.sum() - result.prediction)
    meta = runner.meta(
        "stationary",
        {"window_len": params.window_len},
        {
            "efficiency": "exact",
            "efficiency_tolerance": tol,
            "efficiency_residual": residual,
        },
    )
    return Attribution(
        base_value=result.base_value,
        point_values=points,
        window_values=tuple(zip(windows.windows, result.phi)),
        prediction=result.prediction,
        meta=meta,
    )


def sliding_windowshap(
    predictor: Predictor,
    x_star: TimeSeriesInstance,
    background: BackgroundSet,
    params: SlidingParams,
) -> Attribution:
    """Sweep a window across the series, one inside/outside game per offset.

    A cell's value is the average of (window value / window length) over all
    offsets whose inside window covers the cell; the base value is the mean
    of the per-offset base values.
    """
    _check_shapes(x_star, background)
    d, length = x_star.shape
    plan = sliding_plan(length, params.window_len, params.stride)
    offsets = plan.all_offsets()
    runner = _GameRunner(predictor, x_star, background, params.engine)

    sums = np.zeros((d, length))
    counts = np.zeros((d, length), dtype=np.int64)
    base_values = []
    window_values: list[tuple[Window, float]] = []
    prediction = None
    for offset in offsets:
        players: list[Window] = []
        inside_flags: list[bool] = []
        for i in range(d):
            players.append(contiguous_window(i, offset, offset + params.window_len))
            inside_flags.append(True)
            outside = tuple(
                t for t in range(length) if not offset <= t < offset + params.window_len
            )
            if outside:
                players.append(Window(i, outside))
                inside_flags.append(False)
        result = runner.play(WindowSet(tuple(players), (d, length), partition=True))
        prediction = result.prediction
        base_values.append(result.base_value)
        for window, value, inside in zip(players, result.phi, inside_flags):
            if inside:
                sums[window.variable, offset : offset + params.window_len] += (
                    value / params.window_len
                )
                counts[window.variable, offset : offset + params.window_len] += 1
                window_values.append((window, float(value)))

    points = sums / counts
    base_value = float(np.mean(base_values))
    residual = float(base_value + points.sum() - prediction)
    meta = runner.meta(
        "sliding",
        {"window_len": params.window_len, "stride": params.stride},
        {
            "efficiency": "approximate",
            "efficiency_residual": residual,
            "offsets": list(plan.offsets),
            "tail_offset": plan.tail_offset,
            "base_values": base_values,
        },
    )
    return Attribution(
        base_value=base_value,
        point_values=points,
        window_values=tuple(window_values),
        prediction=float(prediction),
        meta=meta,
    )


def dynamic_windowshap(
    predictor: Predictor,
    x_star: TimeSeriesInstance,
    background: BackgroundSet,
    params: DynamicParams,
) -> Attribution:
    """Threshold-driven refinement from one whole-series window per variable.

    Each iteration plays one joint game over all variables' current windows,
    then splits every splittable window whose absolute value exceeds the
    threshold (largest first, ties by variable then start) until the total
    window budget is reached.
    """
    _check_shapes(x_star, background)
    d, length = x_star.shape
    if params.max_windows < d:
        raise ConfigError(
            f"max_windows={params.max_windows} below one window per variable ({d})"
        )
    runner = _GameRunner(predictor, x_star, background, params.engine)
    state = SplitState.initial(d, length)
    history: list[list[dict]] = []
    budget_exhausted = False
    stop_reason = None
    while True:
        windows = state.windows()
        result = runner.play(windows)
        history.append(
            [
                {"variable": w.variable, "start": w.start, "end": w.end, "value": float(v)}
                for w, v in zip(windows.windows, result.phi)
            ]
        )
        over = [
            (abs(float(v)), w.variable, w.start, w.end)
            for w, v in zip(windows.windows, result.phi)
            if abs(float(v)) > params.threshold
        ]
        splittable = [c for c in over if c[3] - c[2] >= 2]
        if not over:
            stop_reason = "converged"
            break
        if not splittable:
            stop_reason = "atomic"
            break
        if len(windows) >= params.max_windows:
            stop_reason = "budget"
            budget_exhausted = True
            break
        count = len(windows)
        for _, variable, start, _end in sorted(
            splittable, key=lambda c: (-c[0], c[1], c[2])
        ):
            if count >= params.max_windows:
                break
            state = split_window(state, variable, state.points[variable].index(start))
            count += 1

    points = _distribute(windows.windows, result.phi, (d, length))
    tol = EXACT_GAME_TOL if result.mode == "exact" else KERNEL_GAME_TOL
    residual = float(result.base_value + points.sum() - result.prediction)
    meta = runner.meta(
        "dynamic",
        {"threshold": params.threshold, "max_windows": params.max_windows},
        {
            "efficiency": "exact",
            "efficiency_tolerance": tol,
            "efficiency_residual": residual,
            "iterations": len(history),
            "stop_reason": stop_reason,
            "budget_exhausted": budget_exhausted,
            "history": history,
        },
    )
    return Attribution(
        base_value=result.base_value,
        point_values=points,
        window_values=tuple(zip(windows.windows, result.phi)),
        prediction=result.prediction,
        meta=meta,
    )


def explain(
    algorithm: str,
    predictor: Predictor,
    x_star: TimeSeriesInstance,
    background: BackgroundSet,
    params,
) -> Attribution:
    """Dispatch to one of the three explainers by name."""
    if algorithm == "stationary":
        return stationary_windowshap(predictor, x_star, background, params)
    if algorithm == "sliding":
        return sliding_windowshap(predictor, x_star, background, params)
    if algorithm == "dynamic":
        return dynamic_windowshap(predictor, x_star, background, params)
    raise ConfigError(f"unknown algorithm {algorithm!r}")
