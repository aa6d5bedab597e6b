"""Property-based invariants across modules; this file is a single test target."""
import numpy as np
from hypothesis import given, settings, strategies as st

from brgames.evaluation import (
    build_joint_chain,
    evaluate_pair,
    expected_utility,
    utility_matrix,
    UtilityMatrix,
)
from brgames.experiments import GeneratorSpec, generate_game, ParetoPoint, pareto_front
from brgames.game import FPAverage, PolicyParams, fp_push, softmax_rows, validate_game
from brgames.gradients import objective_grad
from brgames.risk import DiscreteUtilityDist, RiskMeasure, cvar, distortion_weights

SETTINGS = settings(max_examples=60, deadline=None)

finite = st.floats(-1e3, 1e3, allow_nan=False)
alphas = st.floats(1e-3, 1.0)


@st.composite
def distributions(draw, max_atoms=16):
    n = draw(st.integers(1, max_atoms))
    values = draw(st.lists(finite, min_size=n, max_size=n))
    weights = np.array(draw(st.lists(st.floats(1e-3, 1.0), min_size=n, max_size=n)))
    return DiscreteUtilityDist(values, weights / weights.sum())


@st.composite
def games(draw, max_states=4, max_actions=3, max_types=3):
    spec = GeneratorSpec(
        num_states=draw(st.integers(1, max_states)),
        num_actions=(draw(st.integers(1, max_actions)), draw(st.integers(1, max_actions))),
        num_types=draw(st.integers(1, max_types)),
        dirichlet_alpha=draw(st.sampled_from([0.1, 1.0, 5.0])),
        xi_mode=draw(st.sampled_from(["uniform", "dirichlet"])),
        discount=draw(st.sampled_from([0.0, 0.5, 0.9, 0.99])),
        master_seed=draw(st.integers(0, 2**32 - 1)),
    )
    return generate_game(spec, draw(st.integers(0, 1000)))


def thetas(g, seed, scale=2.0):
    rng = np.random.default_rng(seed)
    return PolicyParams(rng.normal(0, scale, (g.num_types, g.num_states, g.num_actions[0])),
                        rng.normal(0, scale, (g.num_types, g.num_states, g.num_actions[1])))


# risk


@SETTINGS
@given(distributions(), alphas)
def test_cvar_never_exceeds_mean(d, alpha):
    assert cvar(d, alpha) <= d.mean() + 1e-12 * max(1.0, np.abs(d.values).max())


@SETTINGS
@given(distributions(), alphas, alphas)
def test_cvar_monotone_in_alpha(d, a, b):
    lo, hi = sorted((a, b))
    assert cvar(d, lo) <= cvar(d, hi) + 1e-9


@SETTINGS
@given(distributions(), alphas)
def test_weights_sum_to_one_and_ignore_upper_atoms(d, alpha):
    w = distortion_weights(d, alpha)
    assert abs(w.sum() - 1.0) < 1e-12
    assert np.all(w >= 0)
    order = np.argsort(d.values, kind="stable")
    cum = np.cumsum(d.probs[order])
    boundary = d.values[order][min(np.searchsorted(cum, alpha - 1e-12), len(cum) - 1)]
    assert np.all(w[d.values > boundary] == 0.0)


@SETTINGS
@given(distributions(), alphas, st.floats(1e-2, 1e2), st.floats(-1e3, 1e3))
def test_cvar_homogeneous_and_translation_invariant(d, alpha, c, b):
    scaled = DiscreteUtilityDist(c * d.values + b, d.probs)
    assert abs(cvar(scaled, alpha) - (c * cvar(d, alpha) + b)) < 1e-9 * (1 + abs(c) * np.abs(d.values).max() + abs(b))


# game core


@SETTINGS
@given(st.lists(st.floats(-1e4, 1e4), min_size=1, max_size=8), st.floats(-1e4, 1e4))
def test_softmax_shift_invariance_and_no_nan(logits, c):
    x = np.array(logits)[None, :]
    p = softmax_rows(x)
    assert np.all(np.isfinite(p)) and abs(p.sum() - 1) < 1e-12
    assert np.abs(softmax_rows(x + c) - p).max() < 1e-12


@settings(max_examples=10, deadline=None)
@given(st.integers(1, 1000), st.integers(0, 2**32 - 1))
def test_fp_average_equals_direct_mean(n, seed):
    xs = np.random.default_rng(seed).normal(size=(n, 2, 3))
    avg = FPAverage()
    for x in xs:
        avg = fp_push(avg, x)
    assert np.abs(avg.running_mean - xs.mean(axis=0)).max() < 1e-10


@SETTINGS
@given(games())
def test_generated_games_validate(g):
    validate_game(g)
    np.testing.assert_allclose(g.transition.sum(axis=-1), 1.0, atol=1e-12)
    assert abs(g.type_prior.sum() - 1.0) < 1e-12


# evaluation


@SETTINGS
@given(games(), st.integers(0, 2**32 - 1))
def test_discounted_return_bound(g, seed):
    um = utility_matrix(g, thetas(g, seed))
    bound = np.abs(g.rewards).max() / (1 - g.discount)
    assert np.abs(um.u1).max() <= bound * (1 + 1e-12)
    assert np.abs(um.u2).max() <= bound * (1 + 1e-12)


@SETTINGS
@given(games(), st.integers(0, 2**32 - 1), st.floats(-50, 50))
def test_utility_shift_invariance(g, seed, c):
    theta = thetas(g, seed)
    rng = np.random.default_rng(seed + 1)
    player = int(rng.integers(2))
    t, s = rng.integers(g.num_types), rng.integers(g.num_states)
    shifted = [theta[0].copy(), theta[1].copy()]
    shifted[player][t, s] += c
    a = utility_matrix(g, theta)
    b = utility_matrix(g, PolicyParams(*shifted))
    scale = 1 + np.abs(g.rewards).max() / (1 - g.discount)
    assert np.abs(a.u1 - b.u1).max() < 1e-9 * scale
    assert np.abs(a.u2 - b.u2).max() < 1e-9 * scale


@SETTINGS
@given(st.integers(1, 4), st.integers(0, 2**32 - 1), st.floats(0, 1))
def test_expected_utility_linear_in_prior(K, seed, lam):
    rng = np.random.default_rng(seed)
    um = UtilityMatrix(rng.normal(size=(K, K)), rng.normal(size=(K, K)))
    xa = rng.dirichlet(np.ones(K * K)).reshape(K, K)
    xb = rng.dirichlet(np.ones(K * K)).reshape(K, K)
    mixed = expected_utility(um, lam * xa + (1 - lam) * xb)
    ea, eb = expected_utility(um, xa), expected_utility(um, xb)
    for i in (0, 1):
        assert abs(mixed[i] - (lam * ea[i] + (1 - lam) * eb[i])) < 1e-12


@SETTINGS
@given(games(max_types=2), st.integers(0, 2**32 - 1))
def test_per_pair_solve_matches_batched(g, seed):
    theta = thetas(g, seed)
    um = utility_matrix(g, theta)
    j, k = g.num_types - 1, 0
    u1, u2 = evaluate_pair(build_joint_chain(g, theta, j, k), g.discount, g.initial_state_dist)
    scale = 1 + np.abs(g.rewards).max() / (1 - g.discount)
    assert abs(um.u1[j, k] - u1) < 1e-10 * scale and abs(um.u2[j, k] - u2) < 1e-10 * scale


# gradients


@SETTINGS
@given(games(), st.integers(0, 2**32 - 1), st.sampled_from([1.0, 0.5, 0.25, 0.1]), st.integers(0, 1))
def test_gradient_rows_sum_to_zero(g, seed, alpha, player):
    _, grad = objective_grad(g, thetas(g, seed), player, RiskMeasure.cvar(alpha))
    scale = 1 + np.abs(g.rewards).max() / (1 - g.discount) ** 2
    assert np.abs(grad[0].sum(axis=-1)).max() < 1e-8 * scale
    assert np.abs(grad[1].sum(axis=-1)).max() < 1e-8 * scale
    assert np.all(np.isfinite(grad.flat()))


# experiments


def test_generator_distribution_moments():
    spec = GeneratorSpec(num_states=4, num_actions=(3, 3), num_types=2, reward_mean=0.5, reward_std=2.0,
                         dirichlet_alpha=2.0, master_seed=11)
    gs = [generate_game(spec, i) for i in range(60)]
    R = np.concatenate([g.rewards.ravel() for g in gs])
    assert abs(R.mean() - 0.5) < 0.05 and abs(R.std() - 2.0) < 0.05
    T = np.stack([g.transition for g in gs])
    # Dirichlet(2,2,2,2): mean 1/4, variance (1/4)(3/4)/(8+1)
    assert abs(T.mean() - 0.25) < 1e-12
    assert abs(T.var() - 0.1875 / 9) < 0.002


@SETTINGS
@given(st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5)), min_size=1, max_size=30), st.randoms())
def test_pareto_reorder_invariance(coords, rnd):
    pts = [ParetoPoint(str(i), float(x), float(y)) for i, (x, y) in enumerate(coords)]
    flags = dict(zip((p.algorithm for p in pts), pareto_front(pts)))
    shuffled = pts[:]
    rnd.shuffle(shuffled)
    assert dict(zip((p.algorithm for p in shuffled), pareto_front(shuffled))) == flags
