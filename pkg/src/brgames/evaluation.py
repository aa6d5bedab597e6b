"""Exact discounted evaluation of a pair of type-conditional policies."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import ShapeMismatchError, SingularSystemError
from .game import Game, PolicyParams, policies


@dataclass(frozen=True)
class JointChain:
    """Markov chain induced by fixing player 0's type-j and player 1's type-k policies."""

    P: np.ndarray
    r1: np.ndarray
    r2: np.ndarray


@dataclass(frozen=True)
class UtilityMatrix:
    """``u1[j, k]``, ``u2[j, k]``: exact utilities when player 0 has type j and player 1 type k."""

    u1: np.ndarray
    u2: np.ndarray

    def social_welfare(self) -> np.ndarray:
        return (self.u1 + self.u2) / 2.0


def _check_types(g: Game, j: int, k: int):
    K = g.num_types
    if not (0 <= j < K and 0 <= k < K):
        raise IndexError(f"type pair ({j}, {k}) out of range for K={K}")


def build_joint_chain(g: Game, theta: PolicyParams, j: int, k: int) -> JointChain:
    _check_types(g, j, k)
    pi1, pi2 = policies(theta)
    w = pi1[j][:, :, None] * pi2[k][:, None, :]  # (S, A1, A2)
    P = np.einsum("sab,sabt->st", w, g.transition)
    r1 = np.einsum("sab,sab->s", w, g.rewards[0, j])
    r2 = np.einsum("sab,sab->s", w, g.rewards[1, k])
    return JointChain(P, r1, r2)


def evaluate_pair(chain: JointChain, gamma: float, init) -> tuple[float, float]:
    """Solve (I - gamma P) V_i = r_i by LU and return ``init @ V_i`` for both players."""
    S = chain.P.shape[0]
    M = np.eye(S) - gamma * chain.P
    try:
        V = np.linalg.solve(M, np.stack([chain.r1, chain.r2], axis=1))
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from None
    init = np.asarray(init, dtype=float)
    return float(init @ V[:, 0]), float(init @ V[:, 1])


def pair_terms(g: Game, theta: PolicyParams, want_grad: bool = True):
    """Backend call: ``(U, G1, G2)`` for all type pairs, see ``brgames._fallback``."""
    out = _backend.pair_terms(
        theta[0], theta[1], g.transition, g.rewards, g.discount, g.initial_state_dist, want_grad
    )
    if out is None:
        raise SingularSystemError("I - gamma*P is singular for some type pair")
    return out


def utility_matrix(g: Game, theta: PolicyParams) -> UtilityMatrix:
    U, _, _ = pair_terms(g, theta, want_grad=False)
    return UtilityMatrix(U[0], U[1])


def expected_utility(um: UtilityMatrix, xi) -> tuple[float, float]:
    xi = np.asarray(xi, dtype=float)
    if xi.shape != um.u1.shape:
        raise ShapeMismatchError(f"prior shape {xi.shape} != utility matrix shape {um.u1.shape}")
    return float(np.sum(xi * um.u1)), float(np.sum(xi * um.u2))


def rollout_horizon(gamma: float, tol: float = 1e-6) -> int:
    if gamma == 0.0:
        return 1
    return max(1, math.ceil(math.log(tol) / math.log(gamma)))


MC_CHUNK = 8192


def monte_carlo_pair(g: Game, theta: PolicyParams, j: int, k: int, n: int, rng, horizon=None):
    """Rollout estimate of ``(U_1^{j,k}, U_2^{j,k})``.

    Samples actions and next states step by step and accumulates sampled
    rewards.  Returns ``(means, standard_errors)``, each a length-2 array.
    Independent of the linear-solve path; used only as a test oracle.
    Uniforms are drawn here in fixed-size chunks, so both backends see the
    same random stream.
    """
    _check_types(g, j, k)
    H = rollout_horizon(g.discount) if horizon is None else horizon
    pi1, pi2 = policies(theta)
    S = g.num_states
    # per state: distribution over (a1, a2, s') flattened
    joint = (pi1[j][:, :, None, None] * pi2[k][:, None, :, None] * g.transition).reshape(S, -1)
    cdf = np.cumsum(joint, axis=1)
    cdf[:, -1] = 1.0
    rew = np.stack([g.rewards[0, j], g.rewards[1, k]]).reshape(2, S, -1)
    rew = np.ascontiguousarray(np.repeat(rew, S, axis=2))  # reward ignores s'
    totals = []
    for start in range(0, n, MC_CHUNK):
        size = min(MC_CHUNK, n - start)
        state0 = rng.choice(S, size=size, p=g.initial_state_dist).astype(np.int64)
        u = rng.random((size, H))
        totals.append(_backend.rollout_returns(cdf, rew, state0, u, float(g.discount)))
    total = np.concatenate(totals, axis=1)
    means = total.mean(axis=1)
    se = total.std(axis=1, ddof=1) / np.sqrt(n)
    return means, se
