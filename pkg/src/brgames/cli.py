"""``brg`` command line: generate | solve | batch | pareto.

Exit codes: 0 success, 1 batch finished with failed cells, 2 usage error,
3 parse error, 4 invalid game or spec, 5 non-finite objective, 6 I/O error,
7 missing CSV columns.
"""
from __future__ import annotations

import json
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import click
import numpy as np

from . import __version__, _backend
from .algorithms import SolverConfig, run_solver, solve_mmbi
from .errors import GameParseError, GameValidationError, NonFiniteObjectiveError
from .experiments import (
    DEFAULT_SOLVERS,
    GENERAL_METRICS,
    SOCIAL_METRICS,
    GeneratorSpec,
    ParetoPoint,
    game_metrics,
    generate_game,
    pareto_front,
    read_records_csv,
    records_csv,
    run_batch,
    solver_config,
    spec_dict,
    table_csv,
    table_json,
)
from .game import Game, validate_game
from .plots import pareto_svg
from .risk import DEFAULT_ALPHA, RiskMeasure

EXIT_PARTIAL = 1
EXIT_PARSE = 3
EXIT_INVALID = 4
EXIT_NONFINITE = 5
EXIT_IO = 6
EXIT_COLUMNS = 7


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _seed(seed: int) -> int:
    env = os.environ.get("BRG_SEED")
    if env is None or env == "":
        return seed
    try:
        return int(env)
    except ValueError:
        raise click.BadParameter(f"BRG_SEED must be an integer, got {env!r}")


def _parse_actions(value) -> tuple[int, int]:
    parts = [p for p in str(value).replace(" ", "").split(",") if p]
    try:
        nums = [int(p) for p in parts]
    except ValueError:
        raise click.BadParameter(f"expected N or N1,N2, got {value!r}")
    if len(nums) == 1:
        nums = nums * 2
    if len(nums) != 2:
        raise click.BadParameter(f"expected N or N1,N2, got {value!r}")
    return nums[0], nums[1]


def _write(path: Path, text: str):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        _fail(EXIT_IO, f"cannot write {path}: {exc}")


def _spec_from_flags(seed, num_states, num_actions, num_types, dirichlet_alpha, reward_mean, reward_std,
                     xi_mode, discount) -> GeneratorSpec:
    try:
        return GeneratorSpec(
            num_states=num_states, num_actions=_parse_actions(num_actions), num_types=num_types,
            dirichlet_alpha=dirichlet_alpha, reward_mean=reward_mean, reward_std=reward_std,
            xi_mode=xi_mode, master_seed=_seed(seed), discount=discount,
        )
    except ValueError as exc:
        _fail(EXIT_INVALID, f"invalid generator spec: {exc}")


def spec_options(f):
    opts = [
        click.option("--master-seed", "--seed", "seed", type=int, default=0, show_default=True,
                     help="Master seed; BRG_SEED overrides it."),
        click.option("--num-states", "--states", "num_states", type=int, default=3, show_default=True),
        click.option("--num-actions", "--actions", "num_actions", default="2", show_default=True,
                     help="Actions per player: N or N1,N2."),
        click.option("--num-types", "--types", "num_types", type=int, default=2, show_default=True),
        click.option("--dirichlet-alpha", type=float, default=1.0, show_default=True),
        click.option("--reward-mean", type=float, default=0.0, show_default=True),
        click.option("--reward-std", type=float, default=1.0, show_default=True),
        click.option("--xi-mode", type=click.Choice(["uniform", "dirichlet"]), default="uniform", show_default=True),
        click.option("--discount", type=float, default=0.9, show_default=True),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def solver_options(f):
    opts = [
        click.option("--eta1", type=float, default=SolverConfig.eta1, show_default=True),
        click.option("--eta2", type=float, default=SolverConfig.eta2, show_default=True),
        click.option("--outer-iters", type=int, default=SolverConfig.outer_iters, show_default=True),
        click.option("--inner-iters", type=int, default=SolverConfig.inner_iters, show_default=True),
        click.option("--grad-tol", type=float, default=SolverConfig.grad_tol, show_default=True),
        click.option("--init-jitter/--no-init-jitter", default=False, show_default=True,
                     help="Start from N(0, 0.01) logits instead of zeros."),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def _config(risk, seed, eta1, eta2, outer_iters, inner_iters, grad_tol, init_jitter) -> SolverConfig:
    try:
        return SolverConfig(eta1=eta1, eta2=eta2, risk=risk, outer_iters=outer_iters, inner_iters=inner_iters,
                            grad_tol=grad_tol, seed=seed, init_jitter=init_jitter)
    except ValueError as exc:
        _fail(EXIT_INVALID, f"invalid solver config: {exc}")


def _config_dict(cfg: SolverConfig) -> dict:
    return {
        "eta1": cfg.eta1, "eta2": cfg.eta2, "risk": {"kind": cfg.risk.kind, "alpha": cfg.risk.alpha},
        "outer_iters": cfg.outer_iters, "inner_iters": cfg.inner_iters, "grad_tol": cfg.grad_tol,
        "seed": cfg.seed, "init_jitter": cfg.init_jitter,
    }


def _manifest(command: str, started: float, **fields) -> str:
    doc = {"tool": "brgames", "version": __version__, "command": command, "backend": _backend.BACKEND}
    doc.update(fields)
    doc["wall_clock"] = {
        "started_at": datetime.fromtimestamp(started, timezone.utc).isoformat(),
        "elapsed_seconds": round(time.time() - started, 3),
    }
    return json.dumps(doc, indent=2) + "\n"


@click.group()
@click.version_option(__version__, prog_name="brg")
def main():
    """Risk-sensitive solvers for two-player Bayesian stochastic games."""


@main.command()
@click.option("--games", type=int, default=1, show_default=True)
@spec_options
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default="games", show_default=True)
def generate(games, seed, num_states, num_actions, num_types, dirichlet_alpha, reward_mean, reward_std,
             xi_mode, discount, out_dir):
    """Write GAMES random games as bayes-game-v1 JSON plus a manifest."""
    started = time.time()
    spec = _spec_from_flags(seed, num_states, num_actions, num_types, dirichlet_alpha, reward_mean,
                            reward_std, xi_mode, discount)
    out = Path(out_dir)
    paths = []
    for i in range(games):
        g = generate_game(spec, i)
        validate_game(g)
        p = out / f"game_{i:04d}.json"
        _write(p, g.to_json())
        paths.append(p.name)
    _write(out / "manifest.json", _manifest("generate", started, generator=spec_dict(spec), games=games,
                                            artifacts=paths))
    click.echo(f"wrote {games} games to {out}")


def _load_game(path) -> Game:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        _fail(EXIT_IO, f"cannot read {path}: {exc}")
    try:
        return Game.from_json(text)
    except GameParseError as exc:
        _fail(EXIT_PARSE, f"{path}: {exc}")
    except GameValidationError as exc:
        _fail(EXIT_INVALID, f"{path}: {exc}")


@main.command()
@click.argument("game_file", type=click.Path(dir_okay=False))
@click.option("--solver", type=click.Choice(["mmbi", "ibr", "fp", "dapg"]), required=True)
@click.option("--risk-neutral", "risk_neutral", is_flag=True, help="Optimise the expectation (default).")
@click.option("--cvar", "cvar_alpha", type=float, default=None, help="Optimise CVaR at this alpha.")
@click.option("--metric-alpha", type=float, default=DEFAULT_ALPHA, show_default=True,
              help="Alpha for the reported CVaR metrics.")
@click.option("--seed", type=int, default=0, show_default=True, help="Initialisation seed; BRG_SEED overrides it.")
@solver_options
@click.option("--horizon", type=int, default=50, show_default=True, help="Backward-induction horizon (mmbi).")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Result JSON path (stdout if omitted).")
def solve(game_file, solver, risk_neutral, cvar_alpha, metric_alpha, seed, eta1, eta2, outer_iters, inner_iters,
          grad_tol, init_jitter, horizon, out_path):
    """Run one solver on GAME_FILE and write the result as JSON."""
    if risk_neutral and cvar_alpha is not None:
        raise click.UsageError("--risk-neutral and --cvar are mutually exclusive")
    try:
        risk = RiskMeasure.cvar(cvar_alpha) if cvar_alpha is not None else RiskMeasure.expectation()
        RiskMeasure.cvar(metric_alpha)
    except ValueError as exc:
        _fail(EXIT_INVALID, str(exc))
    g = _load_game(game_file)
    cfg = _config(risk, _seed(seed), eta1, eta2, outer_iters, inner_iters, grad_tol, init_jitter)
    try:
        if solver == "mmbi":
            res = solve_mmbi(g, cfg, horizon=horizon)
        else:
            res = run_solver(solver, g, cfg)
    except NonFiniteObjectiveError as exc:
        _fail(EXIT_NONFINITE, str(exc))
    except ValueError as exc:
        _fail(EXIT_INVALID, str(exc))
    doc = {
        "solver": solver,
        "risk": {"kind": risk.kind, "alpha": risk.alpha},
        "config": _config_dict(cfg),
        "theta": {"player1": res.theta[0].tolist(), "player2": res.theta[1].tolist()},
        "trace": [vars(t) for t in res.trace],
        "converged": res.converged,
        "iterations_used": res.iterations_used,
        "metrics": game_metrics(g, res.theta, metric_alpha),
        "metric_alpha": metric_alpha,
    }
    text = json.dumps(doc, indent=1) + "\n"
    if out_path is None:
        click.echo(text, nl=False)
    else:
        _write(Path(out_path), text)


@main.command()
@click.option("--games", type=int, default=100, show_default=True)
@click.option("--alpha", type=float, default=DEFAULT_ALPHA, show_default=True,
              help="CVaR alpha for RS solvers and reported metrics.")
@spec_options
@solver_options
@click.option("--jobs", type=int, default=1, show_default=True, help="Parallel worker processes.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default="results", show_default=True)
def batch(games, alpha, seed, num_states, num_actions, num_types, dirichlet_alpha, reward_mean, reward_std,
          xi_mode, discount, eta1, eta2, outer_iters, inner_iters, grad_tol, init_jitter, jobs, out_dir):
    """Run the eight default solvers on GAMES paired random games."""
    started = time.time()
    if games < 1:
        _fail(EXIT_INVALID, "--games must be >= 1")
    try:
        RiskMeasure.cvar(alpha)
    except ValueError as exc:
        _fail(EXIT_INVALID, str(exc))
    spec = _spec_from_flags(seed, num_states, num_actions, num_types, dirichlet_alpha, reward_mean,
                            reward_std, xi_mode, discount)
    cfg = _config(RiskMeasure.expectation(), spec.master_seed, eta1, eta2, outer_iters, inner_iters, grad_tol,
                  init_jitter)
    result = run_batch(spec, DEFAULT_SOLVERS, cfg, num_games=games, alpha=alpha, jobs=jobs)
    out = Path(out_dir)
    files = {
        "games.csv": records_csv(result.records),
        "social_welfare.csv": table_csv(result.rows, SOCIAL_METRICS),
        "social_welfare.json": table_json(result.rows, SOCIAL_METRICS),
        "general.csv": table_csv(result.rows, GENERAL_METRICS),
        "general.json": table_json(result.rows, GENERAL_METRICS),
        "failures.csv": "game_index,solver,error\n" + "".join(
            f"{i},{label},\"{err.replace(chr(34), chr(39))}\"\n" for i, label, err in result.failures),
    }
    for name, text in files.items():
        _write(out / name, text)
    solvers = [{"label": label, "solver": name, "config": _config_dict(solver_config(cfg, rs, alpha))}
               for label, name, rs in DEFAULT_SOLVERS]
    _write(out / "manifest.json", _manifest("batch", started, generator=spec_dict(spec), games=games, alpha=alpha,
                                            solvers=solvers, artifacts=sorted(files)))
    click.echo(f"wrote {len(files)} files to {out} ({len(result.failures)} failed cells)")
    if result.failures:
        sys.exit(EXIT_PARTIAL)


@main.command()
@click.argument("games_csv", type=click.Path(dir_okay=False))
@click.option("--x", "x_col", default="U1", show_default=True, help="Column for the horizontal objective.")
@click.option("--y", "y_col", default="U2", show_default=True, help="Column for the vertical objective.")
@click.option("--out-prefix", default="pareto", show_default=True,
              help="Writes PREFIX.csv and PREFIX.svg.")
def pareto(games_csv, x_col, y_col, out_prefix):
    """Per-solver mean objectives from a per-game CSV, with Pareto-front flags and an SVG."""
    try:
        rows = read_records_csv(Path(games_csv).read_text())
    except OSError as exc:
        _fail(EXIT_IO, f"cannot read {games_csv}: {exc}")
    if not rows:
        _fail(EXIT_COLUMNS, f"{games_csv} has no data rows")
    missing = [c for c in ("solver", x_col, y_col) if c not in rows[0]]
    if missing:
        _fail(EXIT_COLUMNS, f"{games_csv} lacks columns {missing}")
    by_solver: dict[str, list[tuple[float, float]]] = {}
    try:
        for r in rows:
            by_solver.setdefault(r["solver"], []).append((float(r[x_col]), float(r[y_col])))
    except ValueError as exc:
        _fail(EXIT_PARSE, f"{games_csv}: {exc}")
    space = f"{x_col}/{y_col}"
    points = [ParetoPoint(name, float(np.mean([v[0] for v in vals])), float(np.mean([v[1] for v in vals])), space)
              for name, vals in by_solver.items()]
    flags = pareto_front(points)
    lines = ["solver,x,y,on_front"]
    lines += [f"{p.algorithm},{p.x!r},{p.y!r},{int(f)}" for p, f in zip(points, flags)]
    _write(Path(f"{out_prefix}.csv"), "\n".join(lines) + "\n")
    _write(Path(f"{out_prefix}.svg"), pareto_svg(points, flags, x_label=f"mean {x_col}", y_label=f"mean {y_col}"))
    front = [p.algorithm for p, f in zip(points, flags) if f]
    click.echo(f"front: {', '.join(front)}")


if __name__ == "__main__":
    main()
