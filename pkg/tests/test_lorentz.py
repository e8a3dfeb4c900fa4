"""Lorentz norms: exact identities, invariances, and an independent quadrature oracle."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from conftest import box_grid
from harmo.errors import InvalidSampleError, UnsupportedDimensionError
from harmo.grid import scalar_field
from harmo.lorentz import (
    LorentzExponent,
    WeightedSample,
    barw_norm,
    distribution_function,
    evaluate_distribution,
    field_sample,
    lorentz_norm,
    sobolev_lorentz_norm,
)
from harmo.metric import flat_metric

finite_vals = st.lists(
    st.floats(min_value=-100.0, max_value=100.0, allow_nan=False),
    min_size=1,
    max_size=30,
)
pos_weights = st.lists(
    st.floats(min_value=1e-3, max_value=10.0, allow_nan=False),
    min_size=30,
    max_size=30,
)


def _sample(values, weights):
    return WeightedSample(values, weights[: len(values)])


@given(finite_vals, pos_weights, st.floats(min_value=0.1, max_value=50.0))
@settings(max_examples=60, deadline=None)
def test_norm_is_positively_homogeneous(values, weights, c):
    e = LorentzExponent(3, 1)
    base = lorentz_norm(_sample(values, weights), e)
    scaled = lorentz_norm(_sample([c * v for v in values], weights), e)
    assert math.isclose(scaled, c * base, rel_tol=1e-10, abs_tol=1e-12)


@given(finite_vals, pos_weights, st.randoms(use_true_random=False))
@settings(max_examples=60, deadline=None)
def test_norm_is_permutation_invariant(values, weights, rand):
    e = LorentzExponent(1.5, 4)
    weights = weights[: len(values)]
    pairs = list(zip(values, weights))
    rand.shuffle(pairs)
    a = lorentz_norm(_sample(values, weights), e)
    b = lorentz_norm(WeightedSample([p[0] for p in pairs], [p[1] for p in pairs]), e)
    assert math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-14)


@given(finite_vals, pos_weights, st.floats(min_value=1.0, max_value=8.0))
@settings(max_examples=100, deadline=None)
def test_diagonal_exponent_recovers_lebesgue_norm(values, weights, p):
    """L^(p,p) must equal the plain weighted L^p norm, by Abel summation."""
    s = _sample(values, weights)
    lp = float(np.sum(s.weights * s.values**p) ** (1.0 / p))
    assert math.isclose(lorentz_norm(s, LorentzExponent(p, p)), lp, rel_tol=1e-10, abs_tol=1e-12)


@pytest.mark.parametrize("p,q", [(1, 1), (2, 1), (3, 2), (1.5, math.inf), (4, 4)])
def test_indicator_norm_closed_form(p, q):
    """For an indicator of mass m: ||1_A||_(p,q) = (p/q)^(1/q) m^(1/p)."""
    area = 0.37
    s = WeightedSample(np.ones(25), np.full(25, area / 25))
    exact = area ** (1.0 / p) if math.isinf(q) else (p / q) ** (1.0 / q) * area ** (1.0 / p)
    assert math.isclose(lorentz_norm(s, LorentzExponent(p, q)), exact, rel_tol=1e-12)


def test_norm_against_quadrature_oracle(rng):
    """Adaptive quadrature of p lam^(q-1) mu(lam)^(q/p), piece by piece."""
    values = rng.lognormal(size=80)
    weights = rng.uniform(0.01, 1.0, size=80)
    s = WeightedSample(values, weights)
    v, _ = distribution_function(s)
    edges = np.concatenate([[0.0], v])
    for p, q in [(2, 1), (1.5, 3), (3, 2)]:
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            piece, _err = quad(
                lambda lam: p * lam ** (q - 1) * evaluate_distribution(s, lam) ** (q / p),
                lo,
                hi,
            )
            total += piece
        oracle = total ** (1.0 / q)
        assert math.isclose(lorentz_norm(s, LorentzExponent(p, q)), oracle, rel_tol=1e-6)


def test_weak_norm_is_max_of_tail_rule():
    s = WeightedSample([3.0, 1.0, 2.0], [0.5, 0.25, 0.125])
    v, tails = distribution_function(s)
    expected = float(np.max(v * tails ** 0.5))
    assert lorentz_norm(s, LorentzExponent(2, math.inf)) == pytest.approx(expected, rel=1e-14)


def test_distribution_function_merges_ties():
    s = WeightedSample([1.0, 1.0, 2.0], [0.2, 0.3, 0.4])
    v, tails = distribution_function(s)
    assert np.array_equal(v, [1.0, 2.0])
    assert np.allclose(tails, [0.9, 0.4])
    # right-continuous evaluation between and beyond breakpoints
    assert np.allclose(evaluate_distribution(s, [0.0, 1.0, 1.5, 2.0, 3.0]), [0.9, 0.4, 0.4, 0.0, 0.0])


def test_exponent_validation():
    with pytest.raises(InvalidSampleError):
        LorentzExponent(0.5, 1)
    with pytest.raises(InvalidSampleError):
        LorentzExponent(math.inf, 2)
    LorentzExponent(math.inf, math.inf)  # allowed


def test_sample_validation():
    with pytest.raises(InvalidSampleError):
        WeightedSample([], [])
    with pytest.raises(InvalidSampleError):
        WeightedSample([1.0], [0.0])
    with pytest.raises(InvalidSampleError):
        WeightedSample([np.nan], [1.0])
    with pytest.raises(InvalidSampleError):
        WeightedSample([1.0, 2.0], [1.0])


def test_barw_norm_of_constant_is_the_constant():
    g = box_grid(3, 9)
    f = scalar_field(g, np.full(g.shape, 0.75))
    assert barw_norm(f) == pytest.approx(0.75, abs=1e-13)


def test_barw_norm_needs_three_dimensions():
    g = box_grid(2, 9)
    with pytest.raises(UnsupportedDimensionError):
        barw_norm(scalar_field(g, np.zeros(g.shape)))


def test_sobolev_lorentz_norm_order_cap():
    g = box_grid(3, 7)
    f = scalar_field(g, np.ones(g.shape))
    with pytest.raises(InvalidSampleError):
        sobolev_lorentz_norm(f, flat_metric(g), 3, LorentzExponent(2, 1))


def test_sobolev_norm_of_constant_has_no_derivative_terms():
    g = box_grid(3, 7)
    f = scalar_field(g, np.full(g.shape, 2.0))
    m = flat_metric(g)
    k0 = sobolev_lorentz_norm(f, m, 0, LorentzExponent(3, 3))
    k2 = sobolev_lorentz_norm(f, m, 2, LorentzExponent(3, 3))
    assert k2 == pytest.approx(k0, rel=1e-12)
    # L^(3,3) of a constant is c * vol^(1/3)
    assert k0 == pytest.approx(2.0 * 1.0 ** (1 / 3), rel=1e-12)
