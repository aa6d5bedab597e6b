"""Random game batches, metric tables and Pareto fronts."""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .algorithms import SolverConfig, run_solver
from .errors import BRGError, ShapeMismatchError
from .evaluation import expected_utility, utility_matrix
from .game import Game
from .risk import DEFAULT_ALPHA, RiskMeasure, cvar, dist_from_matrix

# (row label, solver, risk-sensitive?) in table order
DEFAULT_SOLVERS = (
    ("MMBI", "mmbi", False),
    ("IBR", "ibr", False),
    ("FP", "fp", False),
    ("DAPG", "dapg", False),
    ("RS-MMBI", "mmbi", True),
    ("RS-IBR", "ibr", True),
    ("RS-FP", "fp", True),
    ("RS-DAPG", "dapg", True),
)

GAME_CSV_COLUMNS = (
    "game_index", "solver", "U1", "U2", "SW", "CVaR_U1", "CVaR_U2", "CVaR_SW", "iterations", "converged",
)
METRICS = ("SW", "CVaR_SW", "U1", "U2", "CVaR_U1", "CVaR_U2")
SOCIAL_METRICS = ("SW", "CVaR_SW")
GENERAL_METRICS = ("U1", "U2", "CVaR_U1", "CVaR_U2")


@dataclass(frozen=True)
class GeneratorSpec:
    num_states: int = 3
    num_actions: tuple[int, int] = (2, 2)
    num_types: int = 2
    dirichlet_alpha: float = 1.0
    reward_mean: float = 0.0
    reward_std: float = 1.0
    xi_mode: str = "uniform"
    master_seed: int = 0
    discount: float = 0.9

    def __post_init__(self):
        object.__setattr__(self, "num_actions", tuple(int(a) for a in self.num_actions))
        if self.num_states < 1 or self.num_types < 1 or min(self.num_actions) < 1 or len(self.num_actions) != 2:
            raise ValueError("dimensions must be positive (two action counts)")
        if self.dirichlet_alpha <= 0 or self.reward_std <= 0:
            raise ValueError("dirichlet_alpha and reward_std must be positive")
        if self.xi_mode not in ("uniform", "dirichlet"):
            raise ValueError(f"xi_mode must be 'uniform' or 'dirichlet', got {self.xi_mode!r}")
        if not (0.0 <= self.discount < 1.0):
            raise ValueError("discount must lie in [0, 1)")


def game_rng(master_seed: int, index: int) -> np.random.Generator:
    """Counter-based substream: the stream depends only on (master_seed, index)."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(ss))


def generate_game(spec: GeneratorSpec, index: int) -> Game:
    rng = game_rng(spec.master_seed, index)
    S, K = spec.num_states, spec.num_types
    A1, A2 = spec.num_actions
    T = rng.dirichlet(np.full(S, spec.dirichlet_alpha), size=(S, A1, A2))
    T /= T.sum(axis=-1, keepdims=True)  # a one-atom draw can come back one ulp below 1
    R = rng.normal(spec.reward_mean, spec.reward_std, size=(2, K, S, A1, A2))
    if spec.xi_mode == "uniform":
        xi = np.full((K, K), 1.0 / (K * K))
    else:
        xi = rng.dirichlet(np.ones(K * K)).reshape(K, K)
    return Game(R, T, xi, spec.discount)


@dataclass(frozen=True)
class GameRecord:
    game_index: int
    solver: str
    U1: float
    U2: float
    SW: float
    CVaR_U1: float
    CVaR_U2: float
    CVaR_SW: float
    iterations: int
    converged: bool


@dataclass
class MetricRow:
    algorithm: str
    stats: dict = field(default_factory=dict)  # metric -> (mean, std)
    n_games: int = 0
    n_failed: int = 0


@dataclass
class BatchResult:
    rows: list[MetricRow]
    records: list[GameRecord]
    failures: list[tuple[int, str, str]]


def game_metrics(g: Game, theta, alpha: float) -> dict:
    """Risk-neutral and CVaR metrics of a final policy, all from one utility matrix."""
    um = utility_matrix(g, theta)
    U1, U2 = expected_utility(um, g.type_prior)
    xi = g.type_prior
    return {
        "U1": U1,
        "U2": U2,
        "SW": (U1 + U2) / 2.0,
        "CVaR_U1": cvar(dist_from_matrix(um.u1, xi), alpha),
        "CVaR_U2": cvar(dist_from_matrix(um.u2, xi), alpha),
        "CVaR_SW": cvar(dist_from_matrix(um.social_welfare(), xi), alpha),
    }


def solver_config(base: SolverConfig, risk_sensitive: bool, alpha: float) -> SolverConfig:
    risk = RiskMeasure.cvar(alpha) if risk_sensitive else RiskMeasure.expectation()
    return SolverConfig(
        eta1=base.eta1, eta2=base.eta2, risk=risk, outer_iters=base.outer_iters,
        inner_iters=base.inner_iters, grad_tol=base.grad_tol, seed=base.seed, init_jitter=base.init_jitter,
    )


def _run_cell(args):
    spec, index, label, solver, risk_sensitive, base, alpha = args
    g = generate_game(spec, index)
    cfg = solver_config(base, risk_sensitive, alpha)
    try:
        res = run_solver(solver, g, cfg)
        m = game_metrics(g, res.theta, alpha)
    except (BRGError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return index, label, None, f"{type(exc).__name__}: {exc}"
    rec = GameRecord(index, label, m["U1"], m["U2"], m["SW"], m["CVaR_U1"], m["CVaR_U2"], m["CVaR_SW"],
                     res.iterations_used, res.converged)
    return index, label, rec, None


def _mean_std(xs):
    a = np.asarray(xs, dtype=float)
    if a.size == 0:
        return (math.nan, math.nan)
    return (float(a.mean()), float(a.std()))  # population std


def run_batch(spec: GeneratorSpec, solvers=DEFAULT_SOLVERS, cfg: SolverConfig | None = None,
              num_games: int = 100, alpha: float = DEFAULT_ALPHA, jobs: int = 1) -> BatchResult:
    """Run every solver on the same ``num_games`` games and aggregate metrics.

    ``solvers`` is a sequence of ``(label, solver_name, risk_sensitive)``.
    Failures are recorded per (game, solver) and excluded from aggregates.
    """
    cfg = cfg or SolverConfig()
    cells = [(spec, i, label, solver, rs, cfg, alpha)
             for i in range(num_games) for (label, solver, rs) in solvers]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell, cells, chunksize=1))
    else:
        results = [_run_cell(c) for c in cells]
    # results are already in (game index, solver index) order
    records = [r for _, _, r, _ in results if r is not None]
    failures = [(i, label, err) for i, label, r, err in results if r is None]
    rows = []
    for label, _, _ in solvers:
        mine = [r for r in records if r.solver == label]
        row = MetricRow(label, n_games=len(mine), n_failed=sum(1 for f in failures if f[1] == label))
        for m in METRICS:
            row.stats[m] = _mean_std([getattr(r, m) for r in mine])
        rows.append(row)
    return BatchResult(rows, records, failures)


def _fmt(x) -> str:
    return repr(float(x))


def records_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(GAME_CSV_COLUMNS)
    for r in records:
        w.writerow([r.game_index, r.solver, _fmt(r.U1), _fmt(r.U2), _fmt(r.SW), _fmt(r.CVaR_U1),
                    _fmt(r.CVaR_U2), _fmt(r.CVaR_SW), r.iterations, int(r.converged)])
    return buf.getvalue()


def read_records_csv(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


def table_csv(rows, metrics) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["algorithm"]
    for m in metrics:
        header += [f"{m}_mean", f"{m}_std"]
    w.writerow(header + ["n_games", "n_failed"])
    for row in rows:
        line = [row.algorithm]
        for m in metrics:
            mean, std = row.stats[m]
            line += [_fmt(mean), _fmt(std)]
        w.writerow(line + [row.n_games, row.n_failed])
    return buf.getvalue()


def table_json(rows, metrics) -> str:
    doc = [
        {
            "algorithm": row.algorithm,
            "metrics": {m: {"mean": row.stats[m][0], "std": row.stats[m][1]} for m in metrics},
            "n_games": row.n_games,
            "n_failed": row.n_failed,
        }
        for row in rows
    ]
    return json.dumps(doc, indent=2) + "\n"


@dataclass(frozen=True)
class ParetoPoint:
    algorithm: str
    x: float
    y: float
    space: str = "default"


def dominates(q, p) -> bool:
    return q.x >= p.x and q.y >= p.y and (q.x > p.x or q.y > p.y)


def pareto_front(points) -> list[bool]:
    """Non-dominated flags under maximisation of both coordinates.

    Sweeps points by decreasing x (ties by decreasing y): a point is dominated
    iff some earlier point has a strictly larger y, or an equal y with a
    strictly larger x.
    """
    points = list(points)
    if not points:
        return []
    spaces = {p.space for p in points}
    if len(spaces) > 1:
        raise ShapeMismatchError(f"points mix objective spaces {sorted(spaces)}")
    for p in points:
        if not (math.isfinite(p.x) and math.isfinite(p.y)):
            raise ValueError(f"non-finite coordinates for {p.algorithm}")
    order = sorted(range(len(points)), key=lambda i: (-points[i].x, -points[i].y))
    flags = [False] * len(points)
    best_y = -math.inf          # max y over points with strictly larger x
    group_start = 0
    while group_start < len(order):
        # points sharing the same x
        x = points[order[group_start]].x
        group_end = group_start
        while group_end < len(order) and points[order[group_end]].x == x:
            group_end += 1
        group_max_y = points[order[group_start]].y
        for idx in order[group_start:group_end]:
            y = points[idx].y
            # dominated by a larger-x point with y >= own, or a same-x point with larger y
            flags[idx] = not (best_y >= y or y < group_max_y)
        best_y = max(best_y, group_max_y)
        group_start = group_end
    return flags


def pareto_brute_force(points) -> list[bool]:
    points = list(points)
    n = len(points)
    return [not any(dominates(points[b], points[a]) for b in range(n) if b != a) for a in range(n)]


def spec_dict(spec: GeneratorSpec) -> dict:
    d = asdict(spec)
    d["num_actions"] = list(spec.num_actions)
    return d
