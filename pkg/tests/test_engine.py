from __future__ import annotations

import numpy as np
import pytest

from windowshap import (
    CoalitionMask,
    GameSpec,
    Window,
    WindowSet,
    characteristic_value,
    exact_shapley,
    kernel_shapley,
    shapley_kernel_weight,
)
from windowshap.engine import CallCounter, default_sample_count
from windowshap.errors import ConfigError, DegenerateCoalition, ShapeMismatch, TooManyPlayers

from conftest import FnPredictor, make_background, make_instance, naive_shapley


def singleton_players(d, length):
    return WindowSet(
        tuple(Window(i, (t,)) for i in range(d) for t in range(length)),
        (d, length),
        partition=True,
    )


def game_for(fn, x_star, backgrounds, players=None, **kwargs):
    x = make_instance(x_star)
    if players is None:
        players = singleton_players(*x.shape)
    return GameSpec(
        predictor=FnPredictor(fn, x.shape),
        x_star=x,
        background=make_background(backgrounds),
        players=players,
        **kwargs,
    )


# --- characteristic function -------------------------------------------------

def test_full_coalition_recovers_prediction():
    game = game_for(lambda x: float(x.sum()), [[2.0, 3.0]], [[[0.0, 0.0]]])
    v = characteristic_value(game, CoalitionMask((True, True)))
    assert v == pytest.approx(5.0)


def test_empty_coalition_is_background_mean():
    game = game_for(lambda x: float(x.sum()), [[2.0, 3.0]], [[[1.0, 1.0]], [[3.0, 5.0]]])
    v = characteristic_value(game, CoalitionMask((False, False)))
    assert v == pytest.approx((2.0 + 8.0) / 2.0)


def test_partial_mask_builds_hand_checked_composite():
    # present first cell only: composite (2, 0) under a zero background
    game = game_for(lambda x: float(x.sum()), [[2.0, 3.0]], [[[0.0, 0.0]]])
    v = characteristic_value(game, CoalitionMask((True, False)))
    assert v == pytest.approx(2.0)


def test_mask_length_must_match_players():
    game = game_for(lambda x: float(x.sum()), [[2.0, 3.0]], [[[0.0, 0.0]]])
    with pytest.raises(ShapeMismatch):
        characteristic_value(game, CoalitionMask((True,)))


def test_characteristic_value_counts_one_call():
    game = game_for(lambda x: float(x.sum()), [[2.0, 3.0]], [[[0.0, 0.0]], [[1.0, 1.0]]])
    counter = CallCounter()
    characteristic_value(game, CoalitionMask((True, False)), counter)
    assert counter.predictor_calls == 1
    assert counter.instances_scored == 2


# --- exact enumeration --------------------------------------------------------

def test_exact_additive_model_gives_marginal_weights():
    game = game_for(
        lambda x: float(2.0 * x[0, 0] + 3.0 * x[0, 1]), [[1.0, 1.0]], [[[0.0, 0.0]]]
    )
    result = exact_shapley(game)
    assert result.base_value == pytest.approx(0.0)
    assert result.phi == pytest.approx([2.0, 3.0])
    assert result.prediction == pytest.approx(5.0)


def test_exact_constant_model_gives_zero_phi():
    game = game_for(lambda x: 0.75, [[1.0, 1.0, 1.0]], [[[0.0, 0.0, 0.0]]])
    result = exact_shapley(game)
    assert result.base_value == pytest.approx(0.75)
    assert result.phi == pytest.approx([0.0, 0.0, 0.0], abs=1e-12)


def test_exact_product_model_splits_evenly():
    game = game_for(lambda x: float(x[0, 0] * x[0, 1]), [[2.0, 3.0]], [[[0.0, 0.0]]])
    result = exact_shapley(game)
    assert result.phi == pytest.approx([3.0, 3.0])


def test_exact_matches_permutation_oracle_on_random_games(rng):
    for _ in range(8):
        d, length = int(rng.integers(1, 3)), int(rng.integers(1, 4))
        weights = rng.normal(size=(d, length))
        pair = rng.normal()
        x_star = rng.normal(size=(d, length))
        backgrounds = [rng.normal(size=(d, length)) for _ in range(int(rng.integers(1, 4)))]

        def fn(x, w=weights, c=pair):
            return float((w * x).sum() + c * x[0, 0] * x[-1, -1])

        game = game_for(fn, x_star, backgrounds)
        result = exact_shapley(game)
        expected_phi, expected_base = naive_shapley(
            fn, x_star, backgrounds, game.players.windows
        )
        assert result.phi == pytest.approx(expected_phi, abs=1e-9)
        assert result.base_value == pytest.approx(expected_base, abs=1e-12)


def test_exact_efficiency_and_call_count():
    game = game_for(
        lambda x: float(np.tanh(x).sum()), [[0.3, -1.2, 0.7]], [[[0.0, 0.1, 0.2]]]
    )
    result = exact_shapley(game)
    assert result.base_value + result.phi.sum() == pytest.approx(result.prediction, abs=1e-9)
    assert result.counter.predictor_calls == 2 ** 3
    assert result.coalition_evals == 2 ** 3


def test_exact_refuses_oversized_games():
    x = np.zeros((1, 13))
    with pytest.raises(TooManyPlayers):
        game_for(lambda v: 0.0, x, [x])  # 13 players, exact mode, default limit 12


def test_exact_dummy_player_gets_zero():
    # the model never reads cell (0, 2)
    game = game_for(
        lambda x: float(x[0, 0] * x[0, 1] + 0.5 * x[0, 1]),
        [[1.5, 2.5, 9.0]],
        [[[0.2, -0.3, 0.4]]],
    )
    result = exact_shapley(game)
    assert abs(result.phi[2]) <= 1e-9


def test_exact_symmetric_players_get_equal_phi():
    game = game_for(
        lambda x: float(x[0, 0] + x[0, 1] + 4.0 * x[0, 0] * x[0, 1]),
        [[2.0, 2.0]],
        [[[0.5, 0.5]]],
    )
    result = exact_shapley(game)
    assert result.phi[0] == pytest.approx(result.phi[1], abs=1e-9)


# --- kernel weights -----------------------------------------------------------

def test_kernel_weight_hand_values():
    assert shapley_kernel_weight(2, 1) == pytest.approx(0.5)
    assert shapley_kernel_weight(4, 2) == pytest.approx(0.125)
    assert shapley_kernel_weight(4, 1) == pytest.approx(0.25)
    assert shapley_kernel_weight(4, 3) == pytest.approx(0.25)


def test_kernel_weight_symmetry():
    for m in range(2, 9):
        for z in range(1, m):
            assert shapley_kernel_weight(m, z) == pytest.approx(
                shapley_kernel_weight(m, m - z)
            )


def test_kernel_weight_degenerate_sizes():
    with pytest.raises(DegenerateCoalition):
        shapley_kernel_weight(4, 0)
    with pytest.raises(DegenerateCoalition):
        shapley_kernel_weight(4, 4)


# --- kernel regression --------------------------------------------------------

def test_kernel_full_enumeration_matches_exact(rng):
    for _ in range(6):
        d, length = 1, int(rng.integers(2, 6))
        weights = rng.normal(size=(d, length))
        x_star = rng.normal(size=(d, length))
        backgrounds = [rng.normal(size=(d, length)) for _ in range(2)]

        def fn(x, w=weights):
            return float((w * x).sum() + 0.8 * x[0, 0] * x[0, -1])

        exact = exact_shapley(game_for(fn, x_star, backgrounds))
        kernel = kernel_shapley(
            game_for(fn, x_star, backgrounds, mode="kernel", n_samples=1 << length)
        )
        assert kernel.phi == pytest.approx(exact.phi, abs=1e-6)
        assert kernel.base_value == pytest.approx(exact.base_value, abs=1e-12)


def test_kernel_single_player_is_forced_by_efficiency():
    players = WindowSet((Window(0, (0, 1)),), (1, 2), partition=True)
    game = game_for(
        lambda x: float(x.sum() ** 2), [[1.0, 2.0]], [[[0.0, 0.0]]], players=players,
        mode="kernel",
    )
    result = kernel_shapley(game)
    assert result.phi == pytest.approx([9.0 - 0.0])
    assert result.counter.predictor_calls == 2


def test_kernel_additive_model_is_exact_for_any_seed(rng):
    d, length = 2, 8  # 16 players, sampled mode
    weights = rng.normal(size=(d, length))
    x_star = rng.normal(size=(d, length))
    backgrounds = [rng.normal(size=(d, length)) for _ in range(3)]
    mean_bg = np.mean(backgrounds, axis=0)

    def fn(x, w=weights):
        return float((w * x).sum())

    expected = (weights * (x_star - mean_bg)).ravel()
    for seed in (0, 1, 99):
        result = kernel_shapley(
            game_for(fn, x_star, backgrounds, mode="kernel", n_samples=40, seed=seed)
        )
        assert result.phi == pytest.approx(expected, abs=1e-6)


def test_kernel_call_accounting_and_determinism():
    x_star = np.linspace(0.0, 1.0, 10).reshape(1, 10)
    backgrounds = [np.zeros((1, 10))]

    def fn(x):
        return float(np.sin(x).sum())

    first = kernel_shapley(
        game_for(fn, x_star, backgrounds, mode="kernel", n_samples=30, seed=7)
    )
    second = kernel_shapley(
        game_for(fn, x_star, backgrounds, mode="kernel", n_samples=30, seed=7)
    )
    assert np.array_equal(first.phi, second.phi)
    assert first.counter.predictor_calls == 30 + 2
    assert first.sample_count == 30

    shifted = kernel_shapley(
        game_for(fn, x_star, backgrounds, mode="kernel", n_samples=30, seed=8)
    )
    assert not np.array_equal(first.phi, shifted.phi)


def test_kernel_efficiency_is_constraint_enforced():
    x_star = np.linspace(-1.0, 1.0, 14).reshape(1, 14)
    backgrounds = [np.zeros((1, 14)), np.full((1, 14), 0.3)]

    def fn(x):
        return float(np.cos(x).sum() + x[0, 0] * x[0, 5])

    result = kernel_shapley(
        game_for(fn, x_star, backgrounds, mode="kernel", n_samples=60, seed=3)
    )
    assert result.base_value + result.phi.sum() == pytest.approx(
        result.prediction, abs=1e-9
    )


def test_kernel_rejects_tiny_budgets():
    x_star = np.zeros((1, 10))
    game = game_for(
        lambda x: float(x.sum()), x_star, [np.ones((1, 10))], mode="kernel", n_samples=5
    )
    with pytest.raises(ConfigError):
        kernel_shapley(game)


def test_default_sample_count_scales_with_players():
    assert default_sample_count(2) == 2          # full enumeration of 2 proper masks
    assert default_sample_count(3) == 6
    assert default_sample_count(10) == 40
    assert default_sample_count(96) == 384
    assert default_sample_count(960) == 3840
