"""Exact evaluation and risk-sensitive policy optimisation for two-player Bayesian stochastic games."""
from ._backend import BACKEND
from .algorithms import SolverConfig, SolveResult, solve_dapg, solve_fp, solve_ibr, solve_mmbi
from .evaluation import UtilityMatrix, build_joint_chain, evaluate_pair, expected_utility, utility_matrix
from .experiments import GeneratorSpec, ParetoPoint, generate_game, pareto_front, run_batch
from .game import FPAverage, Game, GradTensor, PolicyParams, fp_push, softmax_policy, validate_game
from .gradients import finite_diff_grad, objective_grad, pair_utility_grad, restricted_grad
from .risk import DiscreteUtilityDist, RiskMeasure, apply, cvar, dist_from_matrix, distortion_weights

__version__ = "0.1.0"
