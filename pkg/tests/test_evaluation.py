import numpy as np
import pytest

from brgames.errors import ShapeMismatchError
from brgames.evaluation import (
    JointChain,
    build_joint_chain,
    evaluate_pair,
    expected_utility,
    monte_carlo_pair,
    utility_matrix,
    UtilityMatrix,
)
from brgames.game import Game, PolicyParams

from conftest import random_game, random_theta, single_state_game


def test_one_hot_policies_select_slice():
    g = random_game(1, num_actions=(2, 3))
    rng = np.random.default_rng(0)
    a1 = rng.integers(0, 2, size=(2, 3))
    a2 = rng.integers(0, 3, size=(2, 3))
    th1 = np.full((2, 3, 2), -50.0)
    th2 = np.full((2, 3, 3), -50.0)
    np.put_along_axis(th1, a1[..., None], 50.0, axis=-1)
    np.put_along_axis(th2, a2[..., None], 50.0, axis=-1)
    theta = PolicyParams(th1, th2)
    for j in range(2):
        for k in range(2):
            chain = build_joint_chain(g, theta, j, k)
            for s in range(3):
                np.testing.assert_allclose(chain.P[s], g.transition[s, a1[j, s], a2[k, s]], atol=1e-9)
                assert abs(chain.r1[s] - g.rewards[0, j, s, a1[j, s], a2[k, s]]) < 1e-9
                assert abs(chain.r2[s] - g.rewards[1, k, s, a1[j, s], a2[k, s]]) < 1e-9


def test_uniform_policies_average_slices():
    g = random_game(2)
    chain = build_joint_chain(g, PolicyParams.zeros(g), 0, 1)
    np.testing.assert_allclose(chain.P, g.transition.mean(axis=(1, 2)), atol=1e-14)
    np.testing.assert_allclose(chain.P.sum(axis=1), 1.0, atol=1e-12)


def test_single_state_chain_is_trivial(rng):
    g = single_state_game(rng.normal(size=(3, 2)), num_types=2)
    chain = build_joint_chain(g, random_theta(g, rng), 1, 0)
    assert chain.P.tolist() == [[1.0]]


def test_evaluate_pair_geometric_series():
    u1, u2 = evaluate_pair(JointChain(np.array([[1.0]]), np.array([2.5]), np.array([0.0])), 0.9, [1.0])
    assert u1 == pytest.approx(25.0, abs=1e-12)
    assert u2 == 0.0


def test_utility_matrix_matches_per_pair_recomputation(rng):
    g = random_game(3)
    theta = random_theta(g, rng)
    um = utility_matrix(g, theta)
    for j in range(2):
        for k in range(2):
            u1, u2 = evaluate_pair(build_joint_chain(g, theta, j, k), g.discount, g.initial_state_dist)
            assert abs(um.u1[j, k] - u1) < 1e-10
            assert abs(um.u2[j, k] - u2) < 1e-10


def test_k1_and_zero_rewards(rng):
    g = random_game(4, num_types=1)
    theta = random_theta(g, rng)
    um = utility_matrix(g, theta)
    assert um.u1.shape == (1, 1)
    u1, u2 = evaluate_pair(build_joint_chain(g, theta, 0, 0), g.discount, g.initial_state_dist)
    assert um.u1[0, 0] == pytest.approx(u1, abs=1e-12)
    R = np.array(g.rewards)
    R[0] = 0.0
    g0 = Game(R, g.transition, g.type_prior, g.discount)
    assert np.all(utility_matrix(g0, theta).u1 == 0.0)


def test_expected_utility_examples(rng):
    um = UtilityMatrix(rng.normal(size=(2, 2)), rng.normal(size=(2, 2)))
    point = np.zeros((2, 2))
    point[1, 0] = 1.0
    assert expected_utility(um, point) == (um.u1[1, 0], um.u2[1, 0])
    U1, U2 = expected_utility(um, np.full((2, 2), 0.25))
    assert U1 == pytest.approx(um.u1.mean(), abs=1e-15)
    xi = rng.dirichlet(np.ones(4)).reshape(2, 2)
    direct = sum(xi[j, k] * um.u1[j, k] for j in range(2) for k in range(2))
    assert abs(expected_utility(um, xi)[0] - direct) < 1e-12
    with pytest.raises(ShapeMismatchError):
        expected_utility(um, np.ones((3, 3)) / 9)


def test_index_errors():
    g = random_game(0)
    with pytest.raises(IndexError):
        build_joint_chain(g, PolicyParams.zeros(g), 2, 0)


def test_monte_carlo_agreement_small():
    g = random_game(7, num_states=4)
    theta = random_theta(g, np.random.default_rng(7))
    um = utility_matrix(g, theta)
    means, se = monte_carlo_pair(g, theta, 1, 1, 40_000, np.random.default_rng(99))
    assert abs(means[0] - um.u1[1, 1]) < 3 * se[0]
    assert abs(means[1] - um.u2[1, 1]) < 3 * se[1]
