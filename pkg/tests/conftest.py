import numpy as np
import pytest

from resgames import Game, Resource, UtilityRule, WelfareRule


def random_game(rng: np.random.Generator, max_players=4, max_actions=4, max_resources=6) -> Game:
    """Small random game with valid concave welfare and nonincreasing utility rules."""
    n_players = int(rng.integers(2, max_players + 1))
    n_res = int(rng.integers(1, max_resources + 1))
    resources = []
    for r in range(n_res):
        diffs = np.sort(rng.random(n_players) + 1e-3)[::-1]
        values = np.cumsum(diffs)
        tail = float(rng.random() * diffs[-1])
        w = WelfareRule(tuple(values), tail)
        fvals = np.concatenate([[values[0]], values[0] * np.sort(rng.random(n_players - 1))[::-1]])
        f = UtilityRule(tuple(fvals), float(fvals[-1] * rng.random()))
        resources.append(Resource(f"r{r}", w, f, float(rng.random() + 0.05)))
    actions = []
    for _ in range(n_players):
        acts = [frozenset()]
        for _ in range(int(rng.integers(1, max_actions))):
            mask = rng.random(n_res) < 0.4
            if not mask.any():
                mask[int(rng.integers(0, n_res))] = True
            acts.append(frozenset(f"r{k}" for k in np.flatnonzero(mask)))
        actions.append(tuple(acts))
    return Game(tuple(resources), tuple(actions))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
