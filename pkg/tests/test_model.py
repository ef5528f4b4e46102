from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phi4flow.model import (DomainError, FlowScales, MomentumConfig, MultiIndex, eta, make_family, propagator,
                            propagator_lambda_derivative, regulator_momentum_derivative, sup_momentum)


def test_kappa_and_domain():
    s = FlowScales(2.0, 100.0, 1.0)
    assert s.kappa == 3.0
    with pytest.raises(DomainError):
        FlowScales(200.0, 100.0)
    with pytest.raises(DomainError):
        FlowScales(1.0, 100.0, 0.0)


def test_propagator_limits():
    s = FlowScales(0.0, 100.0, 1.0)
    assert propagator(0.0, s) == pytest.approx(math.exp(-1e-4))
    assert propagator(4.0, FlowScales(100.0, 100.0)) == 0.0


@given(st.floats(0.0, 50.0), st.floats(0.05, 20.0))
@settings(max_examples=60, deadline=None)
def test_propagator_positive_and_decreasing_in_lam(p2, lam):
    s = FlowScales(lam, 100.0, 1.0)
    c = propagator(p2, s)
    assert c >= 0
    assert propagator(p2, s.at(lam * 1.1)) <= c + 1e-300


@given(st.floats(0.0, 20.0), st.floats(0.2, 20.0))
@settings(max_examples=60, deadline=None)
def test_lambda_derivative_matches_finite_difference(p2, lam):
    s = FlowScales(lam, 100.0, 1.0)
    h = 1e-3 * lam
    f = lambda x: propagator(p2, s.at(x))
    fd = (f(lam - 2 * h) - 8 * f(lam - h) + 8 * f(lam + h) - f(lam + 2 * h)) / (12 * h)
    assert propagator_lambda_derivative(p2, s) == pytest.approx(fd, rel=1e-5, abs=1e-12)


@pytest.mark.parametrize("w", [(1, 0, 0, 0), (0, 2, 0, 0), (1, 1, 0, 0), (3, 0, 0, 0), (1, 1, 1, 0), (0, 2, 1, 0)])
def test_regulator_derivatives_against_finite_differences(w):
    s = FlowScales(1.3, 100.0, 1.0)
    p = np.array([0.4, -0.7, 0.2, 0.9])
    mi = MultiIndex(w)
    ax = mi.axes()
    lower = MultiIndex(tuple(w[i] - (1 if i == ax[-1] else 0) for i in range(4)))
    h = 1e-5
    e = np.zeros(4)
    e[ax[-1]] = h
    fd = (regulator_momentum_derivative(p + e, s, lower) - regulator_momentum_derivative(p - e, s, lower)) / (2 * h)
    assert regulator_momentum_derivative(p, s, mi) == pytest.approx(fd, rel=1e-6, abs=1e-10)


def test_multi_index_validation():
    assert MultiIndex.axis(3).order == 3
    assert MultiIndex((2, 1, 0, 0)).axes() == [0, 0, 1]
    with pytest.raises(DomainError):
        MultiIndex((2, 2, 0, 0))


def test_config_must_sum_to_zero():
    with pytest.raises(DomainError):
        MomentumConfig([[1, 0, 0, 0], [0, 1, 0, 0]])
    with pytest.raises(DomainError):
        MomentumConfig(np.zeros((3, 4)))


def test_families():
    c = make_family("four-point", 2.0, 3.0, 0.5)
    assert sup_momentum(c) == pytest.approx(3.0)
    assert np.linalg.norm(c.momenta[0] + c.momenta[2]) ** 2 == pytest.approx(4 + 9 + 2 * 2 * 3 * 0.5)
    with pytest.raises(DomainError):
        make_family("nonsense")
    with pytest.raises(DomainError):
        make_family("four-point", 1.0, 1.0, 2.0)


def test_eta_small_example():
    c = make_family("four-point", 1.0, 2.0, 0.0)
    # leg 1 with subsets of legs {3, 4} (excluding 2): p, p+q, p-q, p+q-q
    assert eta(c, 1, 2) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        eta(c, 1, 1)
    with pytest.raises(DomainError):
        eta(c, 1, 5)


@given(st.lists(st.floats(-3, 3), min_size=12, max_size=12))
@settings(max_examples=40, deadline=None)
def test_eta_bounded_by_leg_norm(vals):
    P = np.array(vals).reshape(3, 4)
    cfg = MomentumConfig(np.vstack([P, -P.sum(axis=0)]))
    for i in range(1, 5):
        for j in range(1, 5):
            if i != j:
                assert eta(cfg, i, j) <= np.linalg.norm(cfg.momenta[i - 1]) + 1e-12


@pytest.mark.parametrize("lam", [1e-110, 1e-200])
def test_propagator_at_underflowing_scale(lam):
    sc = FlowScales(lam, 10.0)
    assert propagator(1.0, sc) == propagator(1.0, FlowScales(0.0, 10.0))
    assert propagator_lambda_derivative(1.0, sc) == 0.0
