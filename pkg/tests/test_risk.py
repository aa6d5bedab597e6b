import numpy as np
import pytest

from brgames.errors import InvalidAlphaError
from brgames.risk import (
    DiscreteUtilityDist,
    RiskMeasure,
    apply,
    cvar,
    dist_from_matrix,
    distortion_weights,
)


def ru_cvar(values, probs, alpha):
    """Rockafellar-Uryasev lower-tail CVaR: max_t t - E[(t - U)^+]/alpha, enumerated over atoms."""
    values = np.asarray(values, dtype=float)
    probs = np.asarray(probs, dtype=float)
    return max(t - np.sum(probs * np.maximum(t - values, 0.0)) / alpha for t in values)


def test_dist_from_matrix_ordering():
    u = np.array([[1.0, 2.0], [3.0, 4.0]])
    xi = np.array([[0.1, 0.2], [0.3, 0.4]])
    d = dist_from_matrix(u, xi)
    assert d.values.tolist() == [1.0, 2.0, 3.0, 4.0]
    assert d.probs.tolist() == [0.1, 0.2, 0.3, 0.4]
    one = dist_from_matrix([[5.0]], [[1.0]])
    assert one.values.tolist() == [5.0] and one.probs.tolist() == [1.0]
    four = dist_from_matrix(np.zeros((2, 2)), np.full((2, 2), 0.25))
    assert four.probs.tolist() == [0.25] * 4


def test_distortion_weight_examples():
    d = DiscreteUtilityDist([1, 2, 3, 4], [0.25] * 4)
    assert distortion_weights(d, 0.25).tolist() == [1, 0, 0, 0]
    np.testing.assert_allclose(distortion_weights(d, 1.0), d.probs)
    np.testing.assert_allclose(distortion_weights(DiscreteUtilityDist([1, 2], [0.5, 0.5]), 0.75), [2 / 3, 1 / 3],
                               atol=1e-15)


def test_weights_returned_in_original_order():
    d = DiscreteUtilityDist([4, 1, 3, 2], [0.25] * 4)
    np.testing.assert_allclose(distortion_weights(d, 0.5), [0, 0.5, 0, 0.5])


def test_ties_broken_by_index():
    d = DiscreteUtilityDist([2.0, 1.0, 1.0], [0.2, 0.4, 0.4])
    np.testing.assert_allclose(distortion_weights(d, 0.5), [0, 0.8, 0.2], atol=1e-15)


def test_cvar_examples():
    assert cvar(DiscreteUtilityDist([7.5], [1.0]), 0.3) == 7.5
    assert cvar(DiscreteUtilityDist([1, 2, 3, 4], [0.25] * 4), 0.5) == pytest.approx(1.5, abs=1e-15)
    d = DiscreteUtilityDist([3.0, -1.0, 2.0], [0.2, 0.5, 0.3])
    assert abs(cvar(d, 1.0) - d.mean()) < 1e-12


@pytest.mark.parametrize("alpha", [0.0, -0.5, 1.0001])
def test_invalid_alpha(alpha):
    d = DiscreteUtilityDist([1.0], [1.0])
    with pytest.raises(InvalidAlphaError):
        distortion_weights(d, alpha)
    with pytest.raises(InvalidAlphaError):
        RiskMeasure.cvar(alpha)


def test_apply():
    d = DiscreteUtilityDist([0.0, 10.0], [0.9, 0.1])
    obj, w = apply(RiskMeasure.expectation(), d)
    assert obj == pytest.approx(1.0)
    np.testing.assert_array_equal(w, d.probs)
    obj, w = apply(RiskMeasure.cvar(0.25), dist_from_matrix(np.arange(4.0).reshape(2, 2), np.full((2, 2), 0.25)))
    assert obj == 0.0 and w.shape == (4,)


def test_default_alpha_is_quarter():
    assert RiskMeasure.cvar().alpha == 0.25


def test_matches_rockafellar_uryasev(rng):
    for _ in range(200):
        n = rng.integers(1, 17)
        values = rng.normal(size=n) * 5
        probs = rng.dirichlet(np.ones(n))
        d = DiscreteUtilityDist(values, probs)
        for alpha in (0.05, 0.1, 0.25, 0.5, 0.9, 1.0):
            assert abs(cvar(d, alpha) - ru_cvar(values, d.probs, alpha)) < 1e-9
