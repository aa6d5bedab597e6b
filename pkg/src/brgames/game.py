"""Bayesian game data model, softmax policies and the fictitious-play average.

Indices are zero-based throughout: players are 0 and 1, types run over
``range(num_types)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    GameParseError,
    InvalidDiscountError,
    NonStochasticRowError,
    ShapeMismatchError,
)

FORMAT_TAG = "bayes-game-v1"
STOCHASTIC_TOL = 1e-9
NUM_PLAYERS = 2


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Game:
    """Finite two-player Bayesian stochastic game.

    rewards    -- R[player, type, state, a1, a2]
    transition -- T[state, a1, a2, next_state]
    type_prior -- xi[j, k] = P(player 0 has type j, player 1 has type k)
    """

    rewards: np.ndarray
    transition: np.ndarray
    type_prior: np.ndarray
    discount: float
    initial_state_dist: np.ndarray = None

    def __post_init__(self):
        object.__setattr__(self, "rewards", _frozen(self.rewards))
        object.__setattr__(self, "transition", _frozen(self.transition))
        object.__setattr__(self, "type_prior", _frozen(self.type_prior))
        object.__setattr__(self, "discount", float(self.discount))
        if self.initial_state_dist is None:
            if self.transition.ndim < 1 or self.transition.shape[0] < 1:
                raise DimensionMismatchError("transition must have a state axis")
            init = np.zeros(self.transition.shape[0])
            init[0] = 1.0
            object.__setattr__(self, "initial_state_dist", _frozen(init))
        else:
            object.__setattr__(self, "initial_state_dist", _frozen(self.initial_state_dist))

    @property
    def num_states(self) -> int:
        return self.transition.shape[0]

    @property
    def num_actions(self) -> tuple[int, int]:
        return self.transition.shape[1], self.transition.shape[2]

    @property
    def num_types(self) -> int:
        return self.type_prior.shape[0]

    def to_dict(self) -> dict:
        return {
            "format": FORMAT_TAG,
            "dimensions": {
                "num_states": self.num_states,
                "num_actions": list(self.num_actions),
                "num_types": self.num_types,
            },
            "rewards": self.rewards.tolist(),
            "transition": self.transition.tolist(),
            "type_prior": self.type_prior.tolist(),
            "discount": self.discount,
            "initial_state_dist": self.initial_state_dist.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Game":
        if doc.get("format") != FORMAT_TAG:
            raise GameParseError(f"expected format {FORMAT_TAG!r}, got {doc.get('format')!r}")
        try:
            dims = doc["dimensions"]
            game = cls(
                rewards=doc["rewards"],
                transition=doc["transition"],
                type_prior=doc["type_prior"],
                discount=doc["discount"],
                initial_state_dist=doc.get("initial_state_dist"),
            )
        except KeyError as exc:
            raise GameParseError(f"missing field {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            # ragged nested lists end up here
            raise GameParseError(f"malformed array: {exc}") from None
        declared = (dims.get("num_states"), tuple(dims.get("num_actions", ())), dims.get("num_types"))
        if declared != (game.num_states, game.num_actions, game.num_types):
            raise DimensionMismatchError(
                f"dimension header {declared} disagrees with arrays "
                f"{(game.num_states, game.num_actions, game.num_types)}"
            )
        validate_game(game)
        return game

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Game":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise GameParseError(exc.msg, exc.lineno, exc.colno) from None
        if not isinstance(doc, dict):
            raise GameParseError("top-level JSON value must be an object", 1, 1)
        return cls.from_dict(doc)


def _check_simplex(where, arr, lead_ndim):
    for idx in np.ndindex(*arr.shape[:lead_ndim]):
        row = arr[idx]
        total = float(row.sum())
        if np.any(row < 0) or abs(total - 1.0) > STOCHASTIC_TOL:
            raise NonStochasticRowError(where, idx, total)


def validate_game(g: Game) -> None:
    """Raise a ``GameValidationError`` subclass unless every invariant holds."""
    T, R, xi = g.transition, g.rewards, g.type_prior
    if T.ndim != 4:
        raise DimensionMismatchError(f"transition must be 4-D, got shape {T.shape}")
    S, A1, A2, S2 = T.shape
    if S2 != S or min(S, A1, A2) < 1:
        raise DimensionMismatchError(f"transition shape {T.shape} is not (S, A1, A2, S)")
    if xi.ndim != 2 or xi.shape[0] != xi.shape[1] or xi.shape[0] < 1:
        raise DimensionMismatchError(f"type_prior must be K x K, got {xi.shape}")
    K = xi.shape[0]
    if R.shape != (NUM_PLAYERS, K, S, A1, A2):
        raise DimensionMismatchError(f"rewards shape {R.shape} != {(NUM_PLAYERS, K, S, A1, A2)}")
    if g.initial_state_dist.shape != (S,):
        raise DimensionMismatchError(f"initial_state_dist shape {g.initial_state_dist.shape} != ({S},)")
    if not (0.0 <= g.discount < 1.0):
        raise InvalidDiscountError(f"discount must lie in [0, 1), got {g.discount}")
    if not np.all(np.isfinite(R)):
        raise DimensionMismatchError("rewards contain non-finite entries")
    _check_simplex("transition", T, 3)
    _check_simplex("type_prior", xi.reshape(1, -1), 1)
    _check_simplex("initial_state_dist", g.initial_state_dist.reshape(1, -1), 1)


class PolicyParams:
    """Softmax logits, one ``(K, S, A_player)`` block per player.

    Players may have different action counts, so the two blocks are kept as
    separate arrays; ``params[p]`` returns player ``p``'s block.  Instances are
    immutable and support the handful of vector-space operations the solvers
    need.
    """

    __slots__ = ("_blocks",)

    def __init__(self, player1, player2):
        b1, b2 = _frozen(player1), _frozen(player2)
        if b1.ndim != 3 or b2.ndim != 3 or b1.shape[:2] != b2.shape[:2]:
            raise ShapeMismatchError(f"incompatible player blocks {b1.shape} and {b2.shape}")
        if not (np.all(np.isfinite(b1)) and np.all(np.isfinite(b2))):
            raise ValueError("policy parameters must be finite")
        self._blocks = (b1, b2)

    @classmethod
    def zeros(cls, g: Game):
        K, S = g.num_types, g.num_states
        A1, A2 = g.num_actions
        return cls(np.zeros((K, S, A1)), np.zeros((K, S, A2)))

    @classmethod
    def from_flat(cls, flat, g: Game):
        K, S = g.num_types, g.num_states
        A1, A2 = g.num_actions
        n1 = K * S * A1
        flat = np.asarray(flat, dtype=float)
        return cls(flat[:n1].reshape(K, S, A1), flat[n1:].reshape(K, S, A2))

    def __getitem__(self, player: int) -> np.ndarray:
        return self._blocks[player]

    def __iter__(self):
        return iter(self._blocks)

    @property
    def shape(self):
        return self._blocks[0].shape, self._blocks[1].shape

    def replace(self, player: int, block) -> "PolicyParams":
        blocks = list(self._blocks)
        blocks[player] = block
        return type(self)(*blocks)

    def flat(self) -> np.ndarray:
        return np.concatenate([self._blocks[0].ravel(), self._blocks[1].ravel()])

    def norm(self) -> float:
        return float(np.sqrt(sum(np.sum(b * b) for b in self._blocks)))

    def _check(self, other):
        if self.shape != other.shape:
            raise ShapeMismatchError(f"{self.shape} vs {other.shape}")

    def __add__(self, other):
        self._check(other)
        return PolicyParams(self[0] + other[0], self[1] + other[1])

    def __sub__(self, other):
        self._check(other)
        return PolicyParams(self[0] - other[0], self[1] - other[1])

    def __mul__(self, c: float):
        return type(self)(self[0] * c, self[1] * c)

    __rmul__ = __mul__

    def __repr__(self):
        return f"{type(self).__name__}(shapes={self.shape})"


class GradTensor(PolicyParams):
    """Derivatives of a scalar objective, laid out exactly like ``PolicyParams``."""

    __slots__ = ()

    def __add__(self, other):
        self._check(other)
        return GradTensor(self[0] + other[0], self[1] + other[1])


def softmax_rows(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_policy(theta: PolicyParams, player: int, type: int, state: int) -> np.ndarray:
    if player not in (0, 1):
        raise IndexError(f"player index {player} out of range")
    block = theta[player]
    K, S, _ = block.shape
    if not (0 <= type < K) or not (0 <= state < S):
        raise IndexError(f"(type, state)=({type}, {state}) out of range for K={K}, S={S}")
    return softmax_rows(block[type, state])


def policies(theta: PolicyParams) -> tuple[np.ndarray, np.ndarray]:
    """All softmax policies at once: ``pi[p][type, state, action]``."""
    return softmax_rows(theta[0]), softmax_rows(theta[1])


@dataclass(frozen=True)
class FPAverage:
    """Running arithmetic mean of pushed parameter blocks."""

    running_mean: np.ndarray = None
    count: int = 0

    def __post_init__(self):
        if self.running_mean is not None:
            object.__setattr__(self, "running_mean", _frozen(self.running_mean))


def fp_push(avg: FPAverage, theta_slice) -> FPAverage:
    x = np.asarray(theta_slice, dtype=float)
    if avg.count == 0:
        return FPAverage(x.copy(), 1)
    if x.shape != avg.running_mean.shape:
        raise ShapeMismatchError(f"cannot push {x.shape} onto average of shape {avg.running_mean.shape}")
    n = avg.count
    return FPAverage((n * avg.running_mean + x) / (n + 1), n + 1)
