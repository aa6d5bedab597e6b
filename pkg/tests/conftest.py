import numpy as np
import pytest

from brgames.experiments import GeneratorSpec, generate_game
from brgames.game import Game, PolicyParams

ACCEPTANCE_LINES = []


def random_game(seed, num_states=3, num_actions=(2, 2), num_types=2, discount=0.9, xi_mode="uniform"):
    spec = GeneratorSpec(num_states=num_states, num_actions=num_actions, num_types=num_types,
                         master_seed=seed, discount=discount, xi_mode=xi_mode)
    return generate_game(spec, 0)


def random_theta(g: Game, rng, scale=1.0) -> PolicyParams:
    return PolicyParams(rng.normal(0, scale, (g.num_types, g.num_states, g.num_actions[0])),
                        rng.normal(0, scale, (g.num_types, g.num_states, g.num_actions[1])))


def single_state_game(r1, r2=None, num_types=1, discount=0.9):
    """1-state game; ``r1``/``r2`` are (A1, A2) reward tables shared by every type."""
    r1 = np.asarray(r1, dtype=float)
    r2 = np.zeros_like(r1) if r2 is None else np.asarray(r2, dtype=float)
    A1, A2 = r1.shape
    K = num_types
    R = np.stack([np.broadcast_to(r1, (K, 1, A1, A2)), np.broadcast_to(r2, (K, 1, A1, A2))])
    T = np.ones((1, A1, A2, 1))
    xi = np.full((K, K), 1.0 / K**2)
    return Game(R, T, xi, discount)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def report():
    """Collects one pass/fail line per acceptance criterion for the terminal summary."""
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
