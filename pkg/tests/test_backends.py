import os
import subprocess
import sys

import numpy as np
import pytest

from brgames import _fallback
from brgames.evaluation import build_joint_chain, evaluate_pair
from brgames.game import PolicyParams

from conftest import random_game, random_theta

kernels = pytest.importorskip("brgames._kernels")


def call(mod, g, theta, want_grad=True):
    return mod.pair_terms(theta[0], theta[1], g.transition, g.rewards, g.discount, g.initial_state_dist, want_grad)


@pytest.mark.parametrize("dims", [(1, (2, 2), 1), (3, (2, 2), 2), (4, (3, 2), 3), (5, (2, 4), 2)])
def test_compiled_matches_fallback(rng, dims):
    S, A, K = dims
    for seed in range(5):
        g = random_game(seed, num_states=S, num_actions=A, num_types=K, xi_mode="dirichlet")
        theta = random_theta(g, rng, scale=2.0)
        fast = call(kernels, g, theta)
        slow = call(_fallback, g, theta)
        for a, b in zip(fast, slow):
            assert a.shape == b.shape
            assert np.abs(a - b).max() < 1e-12


def test_utilities_match_per_pair_solve(rng):
    g = random_game(9, num_states=4)
    theta = random_theta(g, rng)
    U = call(kernels, g, theta)[0]
    for j in range(2):
        for k in range(2):
            u = evaluate_pair(build_joint_chain(g, theta, j, k), g.discount, g.initial_state_dist)
            assert np.abs(U[:, j, k] - u).max() < 1e-12


def test_without_gradients(rng):
    g = random_game(2)
    theta = random_theta(g, rng)
    U_fast = call(kernels, g, theta, want_grad=False)[0]
    U_slow = call(_fallback, g, theta, want_grad=False)[0]
    assert np.abs(U_fast - U_slow).max() < 1e-12


def test_env_var_forces_fallback():
    env = dict(os.environ, BRG_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import brgames; print(brgames.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
