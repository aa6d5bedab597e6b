"""Pure-numpy implementation of the per-type-pair kernel.

For a type pair (j, k) the policies pi1 = pi1[j], pi2 = pi2[k] induce a
Markov chain P and per-player expected rewards r_i.  With V_i solving
(I - gamma P) V_i = r_i and the discounted occupancy d = mu^T (I - gamma P)^-1,
implicit differentiation gives

    dU_i / dtheta1[j, s, a] = d[s] pi1[s, a] (q1[s, a] - sum_b pi1[s, b] q1[s, b])

where q1[s, a] = sum_b pi2[s, b] Q_i[s, a, b] and
Q_i[s, a, b] = R_i[s, a, b] + gamma sum_t T[s, a, b, t] V_i[t].  Player 2's
gradient is symmetric.
"""
import numpy as np


def _softmax(x):
    z = np.exp(x - x.max(axis=-1, keepdims=True))
    return z / z.sum(axis=-1, keepdims=True)


def pair_terms(theta1, theta2, transition, rewards, gamma, init, want_grad=True):
    """Utilities and logit gradients for every type pair.

    Returns ``(U, G1, G2)`` with ``U[i, j, k] = U_i^{j,k}``,
    ``G1[i, j, k] = dU_i^{j,k}/dtheta1[j]`` of shape (S, A1) and
    ``G2[i, j, k] = dU_i^{j,k}/dtheta2[k]`` of shape (S, A2).  Returns None if
    some I - gamma P is singular.
    """
    T = np.asarray(transition, dtype=float)
    R = np.asarray(rewards, dtype=float)
    mu = np.asarray(init, dtype=float)
    pi1 = _softmax(np.asarray(theta1, dtype=float))
    pi2 = _softmax(np.asarray(theta2, dtype=float))
    K, S = pi1.shape[:2]

    # joint action probabilities per pair: W[j, k, s, a, b]
    W = pi1[:, None, :, :, None] * pi2[None, :, :, None, :]
    P = np.einsum("jksab,sabt->jkst", W, T)
    r = np.stack([
        np.einsum("jksab,jsab->jks", W, R[0]),
        np.einsum("jksab,ksab->jks", W, R[1]),
    ], axis=-1)  # (K, K, S, 2)
    M = np.eye(S) - gamma * P
    try:
        V = np.linalg.solve(M, r)  # (K, K, S, 2)
    except np.linalg.LinAlgError:
        return None
    U = np.einsum("s,jksi->ijk", mu, V)
    if not want_grad:
        A1, A2 = pi1.shape[2], pi2.shape[2]
        return U, np.zeros((2, K, K, S, A1)), np.zeros((2, K, K, S, A2))

    d = np.linalg.solve(np.swapaxes(M, -1, -2), np.broadcast_to(mu, (K, K, S))[..., None])[..., 0]
    cont = gamma * np.einsum("sabt,jkti->ijksab", T, V)
    own = np.stack(np.broadcast_arrays(R[0][:, None], R[1][None, :]), axis=0)
    Q = own + cont  # (2, K, K, S, A1, A2)
    q1 = np.einsum("ksb,ijksab->ijksa", pi2, Q)
    q2 = np.einsum("jsa,ijksab->ijksb", pi1, Q)
    p1 = pi1[None, :, None]
    p2 = pi2[None, None, :]
    adv1 = q1 - np.sum(p1 * q1, axis=-1, keepdims=True)
    adv2 = q2 - np.sum(p2 * q2, axis=-1, keepdims=True)
    G1 = d[None, :, :, :, None] * p1 * adv1
    G2 = d[None, :, :, :, None] * p2 * adv2
    return U, G1, G2


def rollout_returns(cdf, rew, state0, u, gamma):
    """Discounted returns of rollouts driven by pre-drawn uniforms ``u[i, t]``.

    Outcome ``o`` in state ``s`` is the first index with ``cdf[s, o] > u``;
    it flattens (a1, a2, s') so the next state is ``o % S``.
    """
    S, m = cdf.shape
    n, H = u.shape
    state = np.asarray(state0, dtype=np.int64).copy()
    tot = np.zeros((2, n))
    disc = 1.0
    for t in range(H):
        o = (cdf[state] <= u[:, t, None]).sum(axis=1)
        np.minimum(o, m - 1, out=o)
        tot[0] += disc * rew[0, state, o]
        tot[1] += disc * rew[1, state, o]
        disc *= gamma
        state = o % S
    return tot
