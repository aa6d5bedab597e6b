"""Exact policy gradients of per-type-pair utilities and risk-adjusted objectives."""
from __future__ import annotations

import numpy as np

from . import _backend
from .errors import SingularSystemError
from .evaluation import build_joint_chain, evaluate_pair, pair_terms
from .game import Game, GradTensor, PolicyParams, policies
from .risk import RiskMeasure, apply, apply_raw, dist_from_matrix


def pair_utility_grad(g: Game, theta: PolicyParams, j: int, k: int, player: int) -> GradTensor:
    """Gradient of ``U_player^{j,k}`` w.r.t. every logit.

    Differentiates (I - gamma P) V = r implicitly:
    dU = init (I - gamma P)^-1 (dr + gamma dP V).  Only the blocks
    ``theta[0][j]`` and ``theta[1][k]`` can be non-zero.
    """
    if player not in (0, 1):
        raise IndexError(f"player index {player} out of range")
    chain = build_joint_chain(g, theta, j, k)
    S = g.num_states
    M = np.eye(S) - g.discount * chain.P
    r = chain.r1 if player == 0 else chain.r2
    try:
        V = np.linalg.solve(M, r)
        occ = np.linalg.solve(M.T, g.initial_state_dist)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from None

    pi1, pi2 = policies(theta)
    p1, p2 = pi1[j], pi2[k]
    reward = g.rewards[player, j if player == 0 else k]
    Q = reward + g.discount * np.einsum("sabt,t->sab", g.transition, V)

    # d/dtheta of pi_a is pi_a (delta_ab - pi_b); contract with dU/dpi = occ[s] * q[s, a]
    q1 = np.einsum("sb,sab->sa", p2, Q)
    q2 = np.einsum("sa,sab->sb", p1, Q)
    jac1 = np.einsum("sa,ab->sab", p1, np.eye(p1.shape[1])) - p1[:, :, None] * p1[:, None, :]
    jac2 = np.einsum("sa,ab->sab", p2, np.eye(p2.shape[1])) - p2[:, :, None] * p2[:, None, :]
    g1 = occ[:, None] * np.einsum("sab,sa->sb", jac1, q1)
    g2 = occ[:, None] * np.einsum("sab,sa->sb", jac2, q2)

    out1 = np.zeros_like(theta[0])
    out2 = np.zeros_like(theta[1])
    out1[j] = g1
    out2[k] = g2
    return GradTensor(out1, out2)


def _weighted_grad(w, G1, G2, player) -> GradTensor:
    # grad theta1[j] = sum_k w[j,k] G1[j,k];  grad theta2[k] = sum_j w[j,k] G2[j,k]
    return GradTensor(
        np.einsum("jk,jksa->jsa", w, G1[player]),
        np.einsum("jk,jksa->ksa", w, G2[player]),
    )


def objective_grad(g: Game, theta: PolicyParams, player: int, rm: RiskMeasure):
    """``(rho(U_player), d rho / d theta)`` with the risk weights held fixed."""
    return objective_grads(g, theta, rm)[player]


def objective_grads(g: Game, theta: PolicyParams, rm: RiskMeasure):
    """Objective and gradient for both players from one backend call."""
    U, G1, G2 = pair_terms(g, theta)
    K = g.num_types
    out = []
    for player in (0, 1):
        value, w = apply(rm, dist_from_matrix(U[player], g.type_prior))
        out.append((value, _weighted_grad(w.reshape(K, K), G1, G2, player)))
    return out


def raw_grads(g: Game, theta1, theta2, rm: RiskMeasure, players=(0, 1)):
    """Solver hot path on raw logit arrays, skipping the object overhead.

    Returns ``{player: (rho(U_player), grad_wrt_theta1, grad_wrt_theta2)}``
    for each requested player.
    """
    out = _backend.pair_terms(theta1, theta2, g.transition, g.rewards, g.discount, g.initial_state_dist, True)
    if out is None:
        raise SingularSystemError("I - gamma*P is singular for some type pair")
    U, G1, G2 = out
    K = g.num_types
    xi = g.type_prior.ravel()
    res = {}
    for p in players:
        value, w = apply_raw(rm, U[p].ravel(), xi)
        w = w.reshape(K, K)
        res[p] = (value, np.einsum("jk,jksa->jsa", w, G1[p]), np.einsum("jk,jksa->ksa", w, G2[p]))
    return res


def restricted_grad(full: GradTensor, player: int, type: int | None = None) -> GradTensor:
    """Zero every block except ``player`` (and, if given, that player's ``type``)."""
    if player not in (0, 1):
        raise IndexError(f"player index {player} out of range")
    K = full[player].shape[0]
    if type is not None and not (0 <= type < K):
        raise IndexError(f"type index {type} out of range for K={K}")
    blocks = [np.zeros_like(full[0]), np.zeros_like(full[1])]
    if type is None:
        blocks[player] = full[player].copy()
    else:
        blocks[player][type] = full[player][type]
    return GradTensor(*blocks)


def risk_objective(g: Game, theta: PolicyParams, player: int, rm: RiskMeasure) -> float:
    """``rho(U_player)`` via per-pair chains, independent of the batched kernel."""
    K = g.num_types
    u = np.empty((K, K))
    for j in range(K):
        for k in range(K):
            u[j, k] = evaluate_pair(build_joint_chain(g, theta, j, k), g.discount, g.initial_state_dist)[player]
    return apply(rm, dist_from_matrix(u, g.type_prior))[0]


def finite_diff_grad(g: Game, theta: PolicyParams, player: int, rm: RiskMeasure, h: float = 1e-5) -> GradTensor:
    """Central differences of ``rho(U_player)`` over every logit."""
    if h <= 0:
        raise ValueError("step h must be positive")
    x0 = theta.flat()
    grad = np.empty_like(x0)
    for i in range(x0.size):
        e = np.zeros_like(x0)
        e[i] = h
        f_plus = risk_objective(g, PolicyParams.from_flat(x0 + e, g), player, rm)
        f_minus = risk_objective(g, PolicyParams.from_flat(x0 - e, g), player, rm)
        grad[i] = (f_plus - f_minus) / (2 * h)
    flat = PolicyParams.from_flat(grad, g)
    return GradTensor(flat[0], flat[1])
