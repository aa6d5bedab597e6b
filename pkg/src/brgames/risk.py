"""Discrete utility distributions over type pairs and the CVaR functional.

CVaR is the lower-tail kind: ``cvar(d, alpha)`` is the mean of the worst
``alpha`` probability mass, with smaller utilities counting as worse.  It is
computed as an expectation under distortion weights, which the gradient code
reuses as fixed mixing coefficients.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidAlphaError, ShapeMismatchError

DEFAULT_ALPHA = 0.25


@dataclass(frozen=True)
class DiscreteUtilityDist:
    values: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        p = np.asarray(self.probs, dtype=float).ravel()
        if v.shape != p.shape:
            raise ShapeMismatchError(f"{v.size} values but {p.size} probabilities")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "probs", p)

    def mean(self) -> float:
        return float(self.probs @ self.values)


@dataclass(frozen=True)
class RiskMeasure:
    kind: str = "expectation"
    alpha: float = 1.0

    def __post_init__(self):
        if self.kind not in ("expectation", "cvar"):
            raise ValueError(f"unknown risk measure {self.kind!r}")
        _check_alpha(self.alpha)

    @classmethod
    def expectation(cls):
        return cls("expectation", 1.0)

    @classmethod
    def cvar(cls, alpha: float = DEFAULT_ALPHA):
        return cls("cvar", float(alpha))

    @property
    def label(self) -> str:
        return "expectation" if self.kind == "expectation" else f"cvar({self.alpha:g})"


def _check_alpha(alpha):
    if not (0.0 < alpha <= 1.0):
        raise InvalidAlphaError(f"alpha must lie in (0, 1], got {alpha}")


def dist_from_matrix(u, xi) -> DiscreteUtilityDist:
    """Flatten a K x K utility matrix and its prior row-major: atom ``j*K + k``."""
    u = np.asarray(u, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if u.shape != xi.shape:
        raise ShapeMismatchError(f"utility shape {u.shape} != prior shape {xi.shape}")
    return DiscreteUtilityDist(u.ravel(), xi.ravel())


def tail_weights(values: np.ndarray, probs: np.ndarray, alpha: float) -> np.ndarray:
    """Distortion weights on raw arrays; no validation."""
    if alpha == 1.0:
        return probs.copy()
    # stable sort: equal values keep their original order
    order = np.argsort(values, kind="stable")
    w = np.zeros_like(probs)
    remaining = alpha
    for idx in order:
        if remaining <= 0.0:
            break
        take = min(remaining, probs[idx])
        w[idx] = take / alpha
        remaining -= take
    return w


def distortion_weights(d: DiscreteUtilityDist, alpha: float) -> np.ndarray:
    _check_alpha(alpha)
    return tail_weights(d.values, d.probs, alpha)


def cvar(d: DiscreteUtilityDist, alpha: float) -> float:
    return float(distortion_weights(d, alpha) @ d.values)


def apply(rm: RiskMeasure, d: DiscreteUtilityDist) -> tuple[float, np.ndarray]:
    """Objective value and the weights that produce it as a plain expectation."""
    return apply_raw(rm, d.values, d.probs)


def apply_raw(rm: RiskMeasure, values: np.ndarray, probs: np.ndarray) -> tuple[float, np.ndarray]:
    if rm.kind == "expectation":
        w = probs.copy()
    else:
        w = tail_weights(values, probs, rm.alpha)
    return float(w @ values), w
