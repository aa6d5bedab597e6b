"""Iterated best response, fictitious play, dual ascent and backward-induction baselines.

Every solver takes a ``SolverConfig`` whose ``risk`` selects the risk-neutral
(expectation) or risk-sensitive (CVaR) variant.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import NonFiniteObjectiveError
from .evaluation import expected_utility, utility_matrix
from .game import FPAverage, Game, PolicyParams, fp_push
from .gradients import raw_grads
from .risk import RiskMeasure, apply, dist_from_matrix

DETERMINISTIC_LOGIT = 50.0
MAX_MMBI_ASSIGNMENTS = 1 << 16


@dataclass(frozen=True)
class SolverConfig:
    eta1: float = 0.1
    eta2: float = 0.1
    risk: RiskMeasure = field(default_factory=RiskMeasure.expectation)
    outer_iters: int = 200
    inner_iters: int = 50
    grad_tol: float = 1e-6
    seed: int = 0
    init_jitter: bool = False

    def __post_init__(self):
        if self.outer_iters < 1 or self.inner_iters < 1:
            raise ValueError("iteration counts must be >= 1")
        if self.eta1 <= 0 or self.eta2 <= 0 or self.grad_tol <= 0:
            raise ValueError("learning rates and grad_tol must be positive")


@dataclass
class TraceRecord:
    U1: float
    U2: float
    rho1: float
    rho2: float


@dataclass
class SolveResult:
    theta: PolicyParams
    trace: list[TraceRecord]
    converged: bool
    iterations_used: int


def initial_theta(g: Game, cfg: SolverConfig) -> PolicyParams:
    theta = PolicyParams.zeros(g)
    if not cfg.init_jitter:
        return theta
    rng = np.random.default_rng(cfg.seed)
    return PolicyParams(rng.normal(0.0, 0.01, theta[0].shape), rng.normal(0.0, 0.01, theta[1].shape))


def _record(g: Game, theta: PolicyParams, rm: RiskMeasure) -> TraceRecord:
    um = utility_matrix(g, theta)
    U1, U2 = expected_utility(um, g.type_prior)
    rho1 = apply(rm, dist_from_matrix(um.u1, g.type_prior))[0]
    rho2 = apply(rm, dist_from_matrix(um.u2, g.type_prior))[0]
    rec = TraceRecord(U1, U2, rho1, rho2)
    if not np.all(np.isfinite([U1, U2, rho1, rho2])):
        raise NonFiniteObjectiveError(f"non-finite utilities {rec}")
    return rec


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NonFiniteObjectiveError("parameter update produced non-finite values; lower the learning rate")


def _ascend(g, blocks, player, eta, cfg, opponent=None):
    """Inner gradient-ascent loop for one player on raw logit blocks.

    ``opponent``, when given, stands in for the other player's block while the
    objective is evaluated (fictitious play) and is never updated.  Only
    ``blocks[player]`` changes.  Returns the gradient norm at the first inner
    step.
    """
    first_norm = None
    own = blocks[player].copy()
    for _ in range(cfg.inner_iters):
        view = [None, None]
        view[player] = own
        view[1 - player] = blocks[1 - player] if opponent is None else opponent
        value, g1, g2 = raw_grads(g, view[0], view[1], cfg.risk, players=(player,))[player]
        grad = g1 if player == 0 else g2
        with np.errstate(over="ignore", invalid="ignore"):
            norm = float(np.sqrt(np.sum(grad * grad)))
        if first_norm is None:
            first_norm = norm
        if not (np.isfinite(norm) and np.isfinite(value)):
            raise NonFiniteObjectiveError("non-finite objective or gradient; lower the learning rate")
        if norm < cfg.grad_tol:
            break
        with np.errstate(over="ignore", invalid="ignore"):
            own = own + eta * grad
    _check_finite(own)
    blocks[player] = own
    return first_norm


def _best_response_loop(g: Game, cfg: SolverConfig, fictitious: bool) -> SolveResult:
    theta = initial_theta(g, cfg)
    blocks = [theta[0].copy(), theta[1].copy()]
    avg = fp_push(FPAverage(), blocks[0]) if fictitious else None
    trace = []
    converged = False
    for _ in range(cfg.outer_iters):
        n1 = _ascend(g, blocks, 0, cfg.eta1, cfg)
        if fictitious:
            avg = fp_push(avg, blocks[0])
            n2 = _ascend(g, blocks, 1, cfg.eta2, cfg, opponent=avg.running_mean)
        else:
            n2 = _ascend(g, blocks, 1, cfg.eta2, cfg)
        theta = PolicyParams(*blocks)
        trace.append(_record(g, theta, cfg.risk))
        if n1 < cfg.grad_tol and n2 < cfg.grad_tol:
            converged = True
            break
    return SolveResult(theta, trace, converged, len(trace))


def solve_ibr(g: Game, cfg: SolverConfig) -> SolveResult:
    """Player 0 ascends its objective with player 1 frozen, then player 1 against the updated player 0."""
    return _best_response_loop(g, cfg, fictitious=False)


def solve_fp(g: Game, cfg: SolverConfig) -> SolveResult:
    """Like ``solve_ibr`` but player 1 responds to the running mean of player 0's outer iterates.

    The average starts with the initial parameters as iterate 0.  Trace
    utilities are evaluated against player 0's current parameters.
    """
    return _best_response_loop(g, cfg, fictitious=True)


def solve_dapg(g: Game, cfg: SolverConfig) -> SolveResult:
    """Simultaneous ascent of both players on rho(U1) + rho(U2).

    Each outer iteration sweeps the types; every per-type update uses the
    gradient evaluated at the iteration-start parameters.
    """
    theta = initial_theta(g, cfg)
    th1, th2 = theta[0].copy(), theta[1].copy()
    trace = []
    converged = False
    for _ in range(cfg.outer_iters):
        res = raw_grads(g, th1, th2, cfg.risk)
        d1 = res[0][1] + res[1][1]
        d2 = res[0][2] + res[1][2]
        if np.sqrt(np.sum(d1 * d1) + np.sum(d2 * d2)) < cfg.grad_tol:
            converged = True
            trace.append(_record(g, PolicyParams(th1, th2), cfg.risk))
            break
        new1, new2 = th1.copy(), th2.copy()
        with np.errstate(over="ignore", invalid="ignore"):
            for j in range(g.num_types):
                new1[j] += cfg.eta1 * d1[j]
                new2[j] += cfg.eta2 * d2[j]
        _check_finite(new1, new2)
        th1, th2 = new1, new2
        trace.append(_record(g, PolicyParams(th1, th2), cfg.risk))
    return SolveResult(PolicyParams(th1, th2), trace, converged, len(trace))


def _pure_theta(g: Game, act1: np.ndarray, act2: np.ndarray) -> PolicyParams:
    """Encode deterministic choices ``act_p[type, state]`` as +-50 logits."""
    th = []
    for act, A in zip((act1, act2), g.num_actions):
        block = np.full(act.shape + (A,), -DETERMINISTIC_LOGIT)
        np.put_along_axis(block, act[..., None], DETERMINISTIC_LOGIT, axis=-1)
        th.append(block)
    return PolicyParams(*th)


def solve_mmbi(g: Game, cfg: SolverConfig, horizon: int = 50) -> SolveResult:
    """Backward induction for pure type-conditional social-welfare policies.

    At every stage and state, each player picks one action per own type; the
    assignment maximising ``cfg.risk`` applied to the type-pair stage values
    (reward (r1 + r2)/2 plus discounted continuation) under the prior is
    chosen by enumeration.  The stage-1 choices become a stationary policy.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    S, K = g.num_states, g.num_types
    A1, A2 = g.num_actions
    n_assign = (A1 ** K) * (A2 ** K)
    if n_assign > MAX_MMBI_ASSIGNMENTS:
        raise ValueError(f"{n_assign} action assignments per state exceed the enumeration limit")

    # sw[j, k, s, a, b]
    sw = (g.rewards[0][:, None] + g.rewards[1][None, :]) / 2.0
    cand1 = np.array(list(itertools.product(range(A1), repeat=K)))  # (n1, K)
    cand2 = np.array(list(itertools.product(range(A2), repeat=K)))  # (n2, K)
    jj, kk = np.meshgrid(np.arange(K), np.arange(K), indexing="ij")
    xi = g.type_prior
    V = np.zeros((K, K, S))
    act1 = np.zeros((K, S), dtype=int)
    act2 = np.zeros((K, S), dtype=int)
    for _ in range(horizon):
        # Q[j, k, s, a, b]
        Q = sw + g.discount * np.einsum("sabt,jkt->jksab", g.transition, V)
        V_new = np.empty_like(V)
        for s in range(S):
            best = None
            for c1 in cand1:
                for c2 in cand2:
                    atoms = Q[jj, kk, s, c1[jj], c2[kk]]
                    value = apply(cfg.risk, dist_from_matrix(atoms, xi))[0]
                    if best is None or value > best[0]:
                        best = (value, c1, c2, atoms)
            _, c1, c2, atoms = best
            act1[:, s] = c1
            act2[:, s] = c2
            V_new[:, :, s] = atoms
        V = V_new
    theta = _pure_theta(g, act1, act2)
    return SolveResult(theta, [_record(g, theta, cfg.risk)], True, 1)


SOLVERS = {
    "ibr": solve_ibr,
    "fp": solve_fp,
    "dapg": solve_dapg,
    "mmbi": solve_mmbi,
}


def run_solver(name: str, g: Game, cfg: SolverConfig) -> SolveResult:
    try:
        fn = SOLVERS[name]
    except KeyError:
        raise ValueError(f"unknown solver {name!r}; choose from {sorted(SOLVERS)}") from None
    return fn(g, cfg)
