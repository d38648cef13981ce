from __future__ import annotations

import itertools

import numpy as np
import pytest

from windowshap import BackgroundSet, new_instance


class FnPredictor:
    """Wrap a per-instance function f(D x L array) -> float into a batched scorer."""

    def __init__(self, fn, shape):
        self.fn = fn
        self.shape = shape

    def predict(self, batch):
        return np.array([self.fn(x) for x in np.asarray(batch, dtype=np.float64)])


def make_instance(values, names=None):
    arr = np.asarray(values, dtype=np.float64)
    if names is None:
        names = [f"v{i}" for i in range(arr.shape[0])]
    return new_instance(arr, names)


def make_background(arrays):
    return BackgroundSet(tuple(make_instance(a) for a in arrays))


def masked_composite_value(fn, x_star, background_arrays, players, present):
    """Independent realization of the coalition value for the test oracle.

    For each background array: copy it, overwrite the cells of every present
    player with the explained instance's values, apply fn; return the mean.
    """
    values = []
    for bg in background_arrays:
        composite = np.array(bg, dtype=np.float64)
        for k in present:
            window = players[k]
            for t in window.time_steps:
                composite[window.variable, t] = x_star[window.variable, t]
        values.append(fn(composite))
    return float(np.mean(values))


def naive_shapley(fn, x_star, background_arrays, players):
    """Brute-force Shapley values: average marginal gain over all orderings."""
    m = len(players)
    cache: dict[frozenset, float] = {}

    def value(present: frozenset) -> float:
        if present not in cache:
            cache[present] = masked_composite_value(
                fn, x_star, background_arrays, players, present
            )
        return cache[present]

    totals = np.zeros(m)
    perms = list(itertools.permutations(range(m)))
    for perm in perms:
        present: frozenset = frozenset()
        previous = value(present)
        for k in perm:
            present = present | {k}
            current = value(present)
            totals[k] += current - previous
            previous = current
    return totals / len(perms), value(frozenset())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
