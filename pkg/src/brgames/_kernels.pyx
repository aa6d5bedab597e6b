# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-type-pair evaluation and gradient kernel.

Mirrors ``brgames._fallback.pair_terms`` exactly; see that module for the
math.  Each (j, k) pair builds the induced chain, LU-factors I - gamma*P once
and reuses the factorization for both value solves and the transposed
occupancy solve.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs

cnp.import_array()


cdef int _lu_factor(double[:, ::1] M, Py_ssize_t[::1] piv, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, r, c, p
    cdef double best, tmp, f
    for i in range(n):
        p = i
        best = fabs(M[i, i])
        for r in range(i + 1, n):
            if fabs(M[r, i]) > best:
                best = fabs(M[r, i])
                p = r
        if best < 1e-300:
            return 1
        piv[i] = p
        if p != i:
            for c in range(n):
                tmp = M[i, c]
                M[i, c] = M[p, c]
                M[p, c] = tmp
        for r in range(i + 1, n):
            f = M[r, i] / M[i, i]
            M[r, i] = f
            for c in range(i + 1, n):
                M[r, c] -= f * M[i, c]
    return 0


cdef void _lu_solve(double[:, ::1] LU, Py_ssize_t[::1] piv, double[::1] b, Py_ssize_t n) noexcept nogil:
    # solves (LU) x = P b in place
    cdef Py_ssize_t i, c
    cdef double tmp, acc
    for i in range(n):
        if piv[i] != i:
            tmp = b[i]
            b[i] = b[piv[i]]
            b[piv[i]] = tmp
    for i in range(n):
        acc = b[i]
        for c in range(i):
            acc -= LU[i, c] * b[c]
        b[i] = acc
    for i in range(n - 1, -1, -1):
        acc = b[i]
        for c in range(i + 1, n):
            acc -= LU[i, c] * b[c]
        b[i] = acc / LU[i, i]


cdef void _lu_solve_t(double[:, ::1] LU, Py_ssize_t[::1] piv, double[::1] b, Py_ssize_t n) noexcept nogil:
    # solves A^T x = b where P A = L U, i.e. U^T L^T P x = b
    cdef Py_ssize_t i, c
    cdef double tmp, acc
    for i in range(n):
        acc = b[i]
        for c in range(i):
            acc -= LU[c, i] * b[c]
        b[i] = acc / LU[i, i]
    for i in range(n - 1, -1, -1):
        acc = b[i]
        for c in range(i + 1, n):
            acc -= LU[c, i] * b[c]
        b[i] = acc
    for i in range(n - 1, -1, -1):
        if piv[i] != i:
            tmp = b[i]
            b[i] = b[piv[i]]
            b[piv[i]] = tmp


cdef void _softmax(const double[:, :, ::1] logits, double[:, :, ::1] out) noexcept nogil:
    cdef Py_ssize_t K = logits.shape[0], S = logits.shape[1], A = logits.shape[2]
    cdef Py_ssize_t k, s, a
    cdef double m, tot
    for k in range(K):
        for s in range(S):
            m = logits[k, s, 0]
            for a in range(1, A):
                if logits[k, s, a] > m:
                    m = logits[k, s, a]
            tot = 0.0
            for a in range(A):
                out[k, s, a] = exp(logits[k, s, a] - m)
                tot += out[k, s, a]
            for a in range(A):
                out[k, s, a] /= tot


def pair_terms(theta1, theta2, transition, rewards, double gamma, init, bint want_grad=True):
    cdef const double[:, :, ::1] th1 = np.ascontiguousarray(theta1, dtype=np.float64)
    cdef const double[:, :, ::1] th2 = np.ascontiguousarray(theta2, dtype=np.float64)
    cdef const double[:, :, :, ::1] T = np.ascontiguousarray(transition, dtype=np.float64)
    cdef const double[:, :, :, :, ::1] R = np.ascontiguousarray(rewards, dtype=np.float64)
    cdef const double[::1] mu = np.ascontiguousarray(init, dtype=np.float64)

    cdef Py_ssize_t K = th1.shape[0], S = th1.shape[1], A1 = th1.shape[2], A2 = th2.shape[2]
    cdef Py_ssize_t j, k, s, t, a, b, i
    cdef double w, acc, base

    pi1_arr = np.empty((K, S, A1))
    pi2_arr = np.empty((K, S, A2))
    cdef double[:, :, ::1] pi1 = pi1_arr
    cdef double[:, :, ::1] pi2 = pi2_arr
    _softmax(th1, pi1)
    _softmax(th2, pi2)

    U_arr = np.zeros((2, K, K))
    G1_arr = np.zeros((2, K, K, S, A1))
    G2_arr = np.zeros((2, K, K, S, A2))
    cdef double[:, :, ::1] U = U_arr
    cdef double[:, :, :, :, ::1] G1 = G1_arr
    cdef double[:, :, :, :, ::1] G2 = G2_arr

    M_arr = np.empty((S, S))
    cdef double[:, ::1] M = M_arr
    cdef Py_ssize_t[::1] piv = np.empty(S, dtype=np.intp)
    cdef double[:, ::1] V = np.empty((2, S))
    cdef double[::1] d = np.empty(S)
    cdef double[:, :, ::1] Q = np.empty((A1, A2, 2))
    cdef double[::1] q1 = np.empty(A1)
    cdef double[::1] q2 = np.empty(A2)
    cdef int singular = 0

    with nogil:
        for j in range(K):
            for k in range(K):
                for s in range(S):
                    for t in range(S):
                        M[s, t] = 0.0
                    V[0, s] = 0.0
                    V[1, s] = 0.0
                    for a in range(A1):
                        for b in range(A2):
                            w = pi1[j, s, a] * pi2[k, s, b]
                            V[0, s] += w * R[0, j, s, a, b]
                            V[1, s] += w * R[1, k, s, a, b]
                            for t in range(S):
                                M[s, t] -= gamma * w * T[s, a, b, t]
                    M[s, s] += 1.0
                if _lu_factor(M, piv, S):
                    singular = 1
                    break
                _lu_solve(M, piv, V[0], S)
                _lu_solve(M, piv, V[1], S)
                for i in range(2):
                    acc = 0.0
                    for s in range(S):
                        acc += mu[s] * V[i, s]
                    U[i, j, k] = acc
                if not want_grad:
                    continue
                for s in range(S):
                    d[s] = mu[s]
                _lu_solve_t(M, piv, d, S)
                for s in range(S):
                    for a in range(A1):
                        for b in range(A2):
                            Q[a, b, 0] = R[0, j, s, a, b]
                            Q[a, b, 1] = R[1, k, s, a, b]
                            for t in range(S):
                                Q[a, b, 0] += gamma * T[s, a, b, t] * V[0, t]
                                Q[a, b, 1] += gamma * T[s, a, b, t] * V[1, t]
                    for i in range(2):
                        for a in range(A1):
                            acc = 0.0
                            for b in range(A2):
                                acc += pi2[k, s, b] * Q[a, b, i]
                            q1[a] = acc
                        base = 0.0
                        for a in range(A1):
                            base += pi1[j, s, a] * q1[a]
                        for a in range(A1):
                            G1[i, j, k, s, a] = d[s] * pi1[j, s, a] * (q1[a] - base)
                        for b in range(A2):
                            acc = 0.0
                            for a in range(A1):
                                acc += pi1[j, s, a] * Q[a, b, i]
                            q2[b] = acc
                        base = 0.0
                        for b in range(A2):
                            base += pi2[k, s, b] * q2[b]
                        for b in range(A2):
                            G2[i, j, k, s, b] = d[s] * pi2[k, s, b] * (q2[b] - base)
            if singular:
                break
    if singular:
        return None
    return U_arr, G1_arr, G2_arr


def rollout_returns(const double[:, ::1] cdf, const double[:, :, ::1] rew, const cnp.int64_t[::1] state0,
                    const double[:, ::1] u, double gamma):
    """Discounted returns of rollouts driven by pre-drawn uniforms.

    ``cdf[s]`` is the cumulative distribution over flattened (a1, a2, s')
    outcomes, ``rew[p, s, o]`` the reward of player p for outcome o in s, and
    ``u[i, t]`` the uniform consumed by rollout i at step t.
    """
    cdef Py_ssize_t n = u.shape[0], H = u.shape[1], S = cdf.shape[0], m = cdf.shape[1]
    cdef Py_ssize_t i, t, o, s
    cdef double x, disc, a, b
    out = np.zeros((2, n))
    cdef double[:, ::1] tot = out
    with nogil:
        for i in range(n):
            s = state0[i]
            disc = 1.0
            a = 0.0
            b = 0.0
            for t in range(H):
                x = u[i, t]
                o = 0
                while o < m - 1 and cdf[s, o] <= x:
                    o += 1
                a += disc * rew[0, s, o]
                b += disc * rew[1, s, o]
                disc *= gamma
                s = o % S
            tot[0, i] = a
            tot[1, i] = b
    return out
