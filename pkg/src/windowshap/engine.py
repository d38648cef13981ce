"""Shapley values over an arbitrary player set against a black-box predictor.

Players are time windows. The characteristic value of a coalition is the mean
predictor score over composites built from the background set: absent cells
keep the background instance's values, present cells take the explained
instance's values. Small games are solved exactly by enumerating all
coalitions; larger games by a kernel-weighted least-squares regression over
sampled coalitions with the efficiency constraint enforced by eliminating one
coefficient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import BackgroundSet, Predictor, TimeSeriesInstance, WindowSet
from .errors import (
    ConfigError,
    DegenerateCoalition,
    PredictorFailure,
    ShapeMismatch,
    SingularSystem,
    TooManyPlayers,
    WindowShapError,
)

DEFAULT_EXACT_THRESHOLD = 12
RIDGE = 1e-10


@dataclass(frozen=True)
class CoalitionMask:
    """One bit per player; True marks the player as present."""

    bits: tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(bool(b) for b in self.bits))

    def __len__(self) -> int:
        return len(self.bits)


@dataclass
class CallCounter:
    """Monotone tally of predictor traffic during one or more games."""

    predictor_calls: int = 0
    instances_scored: int = 0

    def add(self, batch_size: int) -> None:
        self.predictor_calls += 1
        self.instances_scored += batch_size

    def merge(self, other: CallCounter) -> None:
        self.predictor_calls += other.predictor_calls
        self.instances_scored += other.instances_scored


@dataclass(frozen=True)
class GameSpec:
    """One Shapley game: a predictor, an instance to explain, and the players."""

    predictor: Predictor
    x_star: TimeSeriesInstance
    background: BackgroundSet
    players: WindowSet
    mode: str = "exact"
    n_samples: int | None = None
    seed: object = 0
    exact_threshold: int = DEFAULT_EXACT_THRESHOLD

    def __post_init__(self):
        if self.x_star.shape != self.background.shape:
            raise ShapeMismatch(
                f"instance shape {self.x_star.shape} != background shape {self.background.shape}"
            )
        if self.players.shape != self.x_star.shape:
            raise ShapeMismatch(
                f"player grid {self.players.shape} != instance shape {self.x_star.shape}"
            )
        if self.mode not in ("exact", "kernel"):
            raise ConfigError(f"unknown engine mode {self.mode!r}")
        if self.mode == "exact" and len(self.players) > self.exact_threshold:
            raise TooManyPlayers(len(self.players), self.exact_threshold)


@dataclass(frozen=True)
class GameResult:
    base_value: float
    phi: np.ndarray
    prediction: float
    counter: CallCounter
    mode: str
    coalition_evals: int
    sample_count: int | None = None


class _Evaluator:
    """Precomputed composite machinery for one game."""

    def __init__(self, game: GameSpec):
        self.game = game
        self.background = game.background.stacked()
        self.batch_size = game.background.size
        x = game.x_star.values
        d, length = x.shape
        cell_masks = np.zeros((len(game.players), d, length), dtype=bool)
        for k, window in enumerate(game.players.windows):
            cell_masks[k, window.variable, list(window.time_steps)] = True
        self.cell_masks = cell_masks
        self.x_star = x

    def value(self, bits: np.ndarray, counter: CallCounter) -> float:
        """Mean predictor score over background composites for one coalition."""
        if bits.any():
            present = self.cell_masks[bits].any(axis=0)
            batch = np.where(present[None, :, :], self.x_star[None, :, :], self.background)
        else:
            batch = self.background
        try:
            scores = np.asarray(self.game.predictor.predict(batch), dtype=np.float64)
        except WindowShapError:
            raise
        except Exception as exc:
            raise PredictorFailure(str(exc), batch_size=self.batch_size) from exc
        if scores.shape != (self.batch_size,):
            raise PredictorFailure(
                f"predictor returned shape {scores.shape}, expected ({self.batch_size},)",
                batch_size=self.batch_size,
            )
        if not np.isfinite(scores).all():
            raise PredictorFailure("predictor returned non-finite scores", self.batch_size)
        counter.add(self.batch_size)
        return float(scores.mean())


def characteristic_value(
    game: GameSpec, mask: CoalitionMask, counter: CallCounter | None = None
) -> float:
    """Value of one coalition: background composites scored in a single call."""
    if len(mask) != len(game.players):
        raise ShapeMismatch(f"mask length {len(mask)} != {len(game.players)} players")
    return _Evaluator(game).value(
        np.array(mask.bits, dtype=bool), counter if counter is not None else CallCounter()
    )


def exact_shapley(game: GameSpec) -> GameResult:
    """Enumerate all 2^M coalitions and average marginal contributions.

    Each coalition value is computed once; the base value is the empty
    coalition's value and the efficiency identity holds to float precision.
    """
    m = len(game.players)
    if m > game.exact_threshold:
        raise TooManyPlayers(m, game.exact_threshold)
    evaluator = _Evaluator(game)
    counter = CallCounter()

    n_masks = 1 << m
    values = np.empty(n_masks)
    for code in range(n_masks):
        bits = (code >> np.arange(m)) & 1
        values[code] = evaluator.value(bits.astype(bool), counter)

    codes = np.arange(n_masks)
    sizes = np.zeros(n_masks, dtype=np.int64)
    for k in range(m):
        sizes += (codes >> k) & 1
    fact = [math.factorial(i) for i in range(m + 1)]
    weights = np.array(
        [fact[s] * fact[m - s - 1] / fact[m] for s in range(m)] + [0.0]
    )

    phi = np.empty(m)
    for k in range(m):
        without = codes[(codes >> k) & 1 == 0]
        gains = values[without | (1 << k)] - values[without]
        phi[k] = float(np.dot(weights[sizes[without]], gains))

    return GameResult(
        base_value=float(values[0]),
        phi=phi,
        prediction=float(values[-1]),
        counter=counter,
        mode="exact",
        coalition_evals=n_masks,
    )


def shapley_kernel_weight(m: int, z: int) -> float:
    """Regression weight of a coalition of size z among m players."""
    if z <= 0 or z >= m:
        raise DegenerateCoalition(
            f"coalition size {z} of {m} players has no finite kernel weight"
        )
    return (m - 1) / (math.comb(m, z) * z * (m - z))


def default_sample_count(m: int) -> int:
    """Coalition budget for kernel games: proportional to the player count.

    Capped at full enumeration of proper coalitions; the linear scaling keeps
    the predictor-call count shrinking in step with window merging.
    """
    return min((1 << m) - 2, max(m + 2, 4 * m))


def _sample_masks(m: int, n_samples: int, seed) -> np.ndarray:
    """Deterministic coalition design: paired seeds then size-stratified draws."""
    rng = np.random.default_rng(seed)
    masks = np.zeros((n_samples, m), dtype=bool)
    fixed = 0
    for k in range(m):
        if fixed >= n_samples:
            break
        masks[fixed, k] = True
        fixed += 1
    for k in range(m):
        if fixed >= n_samples:
            break
        masks[fixed] = True
        masks[fixed, k] = False
        fixed += 1
    remaining = n_samples - fixed
    if remaining > 0:
        sizes = np.arange(2, m - 1)
        mass = np.array(
            [shapley_kernel_weight(m, int(z)) * math.comb(m, int(z)) for z in sizes]
        )
        draws = rng.choice(sizes, size=remaining, p=mass / mass.sum())
        for row, z in enumerate(draws):
            masks[fixed + row, rng.permutation(m)[: int(z)]] = True
    return masks


def kernel_shapley(game: GameSpec) -> GameResult:
    """Approximate Shapley values via kernel-weighted constrained regression.

    The base value is the empty coalition's value; the efficiency constraint
    (values sum to prediction minus base) is enforced by eliminating the last
    player's coefficient. When the budget covers all proper coalitions they
    are enumerated instead of sampled.
    """
    m = len(game.players)
    evaluator = _Evaluator(game)
    counter = CallCounter()

    base = evaluator.value(np.zeros(m, dtype=bool), counter)
    prediction = evaluator.value(np.ones(m, dtype=bool), counter)
    total = prediction - base

    if m == 1:
        return GameResult(base, np.array([total]), prediction, counter, "kernel", 2, 0)

    n_proper = (1 << m) - 2
    n_samples = game.n_samples if game.n_samples is not None else default_sample_count(m)
    if n_samples >= n_proper:
        n_samples = n_proper
        codes = [c for c in range(1, (1 << m) - 1)]
        masks = np.array(
            [[(c >> k) & 1 for k in range(m)] for c in codes], dtype=bool
        )
    else:
        if n_samples < m + 2:
            raise ConfigError(f"n_samples={n_samples} below the minimum {m + 2} for {m} players")
        masks = _sample_masks(m, n_samples, game.seed)

    values = np.empty(len(masks))
    for row, bits in enumerate(masks):
        values[row] = evaluator.value(bits, counter)

    sizes = masks.sum(axis=1)
    weights = np.array([shapley_kernel_weight(m, int(z)) for z in sizes])

    z = masks.astype(np.float64)
    y = (values - base) - z[:, -1] * total
    x = z[:, :-1] - z[:, -1:]
    xw = x * weights[:, None]
    normal = x.T @ xw + RIDGE * np.eye(m - 1)
    rhs = xw.T @ y
    try:
        beta = np.linalg.solve(normal, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    if not np.isfinite(beta).all():
        raise SingularSystem("regression produced non-finite coefficients")

    phi = np.append(beta, total - beta.sum())
    return GameResult(
        base_value=base,
        phi=phi,
        prediction=prediction,
        counter=counter,
        mode="kernel",
        coalition_evals=n_samples + 2,
        sample_count=n_samples,
    )


def play_game(game: GameSpec) -> GameResult:
    if game.mode == "exact":
        return exact_shapley(game)
    return kernel_shapley(game)


def resolve_mode(mode: str, n_players: int, exact_threshold: int = DEFAULT_EXACT_THRESHOLD) -> str:
    """Map the "auto" policy to a concrete engine mode for one game."""
    if mode == "auto":
        return "exact" if n_players <= exact_threshold else "kernel"
    if mode not in ("exact", "kernel"):
        raise ConfigError(f"unknown engine mode {mode!r}")
    return mode
