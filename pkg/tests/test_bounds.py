from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phi4flow import bounds
from phi4flow.bounds import AmplitudeNode, BoundParams
from phi4flow.model import make_family


def test_theorem_bound_examples():
    # four-point tree: kappa^0 K^0 2!/2! and a single log term
    assert bounds.theorem_bound(BoundParams(2, 0, 7.0, 1.0, 1.0, 0.0)) == pytest.approx(1.0)
    # six-point one loop at kappa = m, |p| <= kappa: kappa^-2 K^3 4!/3! (1 + 0/2)
    assert bounds.theorem_bound(BoundParams(3, 1, 2.0, 1.0, 1.0, 0.5)) == pytest.approx(4 * 8.0)
    # two-point one loop: sup(|p|, kappa)^2 K^2 1!/4
    assert bounds.theorem_bound(BoundParams(1, 1, 3.0, 2.0, 1.0, 5.0)) == pytest.approx(25 * 9 / 4)


def test_theorem_bound_log_series():
    L = math.log(3.0)
    b = bounds.theorem_bound(BoundParams(2, 2, 1.0, 3.0, 1.0, 0.0))
    assert b == pytest.approx(math.factorial(4) / 2 * (1 + L / 2 + L * L / 8))


def test_two_point_tree_bound_rejected():
    with pytest.raises(ValueError):
        bounds.theorem_bound(BoundParams(1, 0, 1.0, 1.0, 1.0, 0.0))


@pytest.mark.parametrize("kw", [dict(n=0), dict(l=-1), dict(w=4), dict(K=0.0), dict(kappa=0.5), dict(p=-1.0)])
def test_bound_params_validation(kw):
    base = dict(n=2, l=1, K=1.0, kappa=1.0, m=1.0, p=0.0)
    base.update(kw)
    with pytest.raises(ValueError):
        BoundParams(**base)


@given(st.integers(1, 5), st.integers(1, 5), st.floats(1.0, 50.0), st.floats(0.0, 1e3), st.floats(0.0, 1e3))
@settings(max_examples=200, deadline=None)
def test_theorem_bound_monotone_in_momentum(n, l, kappa, p1, p2):
    lo, hi = sorted((p1, p2))
    b1 = bounds.theorem_bound(BoundParams(n, l, 2.0, kappa, 1.0, lo))
    b2 = bounds.theorem_bound(BoundParams(n, l, 2.0, kappa, 1.0, hi))
    assert b1 <= b2 * (1 + 1e-12)


@given(st.floats(0.0, 10.0), st.floats(0.0, 10.0), st.floats(-1.0, 1.0), st.integers(1, 3))
@settings(max_examples=100, deadline=None)
def test_eta_inf_not_larger_than_single_pair(pn, qn, cos, w):
    cfg = make_family("four-point", pn, qn, cos)
    P = BoundParams(2, 1, 2.0, 1.0, 1.0, max(pn, qn), w=w)
    inf = bounds.eta_factor(P, cfg, i=1)
    for j in (2, 3, 4):
        assert inf <= bounds.eta_factor(P, cfg, i=1, j=j) * (1 + 1e-12)


def test_eta_factor_trivial_for_w_zero():
    assert bounds.eta_factor(BoundParams(2, 1, 2.0, 1.0, 1.0, 0.0)) == 1.0


def test_proposition_case_validation():
    P = BoundParams(2, 1, 2.0, 1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        bounds.proposition_bound(P, "2n>4")
    with pytest.raises(ValueError):
        bounds.proposition_bound(P, "no-such-case")
    assert bounds.proposition_bound(P, "2n=4,|w|=0") > 0


def test_proposition_zero_momentum_case_is_sharper():
    for l in (1, 2, 3):
        P = BoundParams(2, l, 3.0, 2.0, 1.0, 0.0)
        assert bounds.proposition_bound(P, "2n=4,p1=0") <= bounds.proposition_bound(P, "2n=4,|w|=0")


def test_proposition_bound_below_theorem_bound_for_irrelevant():
    # the inductive bound carries 1/((l+1)^2 n^3) and is tighter than the final one
    for n, l in ((3, 0), (3, 2), (5, 1)):
        P = BoundParams(n, l, 10.0, 1.5, 1.0, 2.0)
        assert bounds.proposition_bound(P, "2n>4") <= bounds.theorem_bound(P)


def test_default_case_selection():
    assert bounds.default_case(3, 0) == "2n>4"
    assert bounds.default_case(2, 1) == "2n=4,|w|>=1"
    assert bounds.default_case(2, 0) == "2n=4,|w|=0"
    assert bounds.default_case(2, 0, first_momentum_zero=True) == "2n=4,p1=0"
    assert bounds.default_case(1, 3) == "2n=2,|w|=3"
    assert bounds.default_case(1, 2, at_zero=True) == "2n=2,p=0"
    assert bounds.default_case(1, 1, at_zero=True) == "2n=2,|w|<=2"


def test_check_amplitude_counts_violations():
    nodes = [AmplitudeNode(2, 0, 0.0, 0.0, 1.0, -1 / 24),      # tree, exactly the bound in unit coupling
             AmplitudeNode(1, 0, 0.0, 0.0, 1.0, 5.0),          # two-point tree is skipped
             AmplitudeNode(2, 1, 0.0, 0.0, 1.0, 1e6)]
    rep = bounds.check_amplitude(nodes, K=1.0)
    assert not rep.passed
    assert rep.checks[0].computed == 1.0
    ok = bounds.check_amplitude(nodes[:2], K=1.0)
    assert ok.passed and ok.info["worst_margin"] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        bounds.check_amplitude(nodes, K=0.0)


def test_log_growth_fit_recovers_line():
    p = np.geomspace(10.0, 200.0, 10)
    v = 0.3 - 1.7 * np.log(p / 2.0)
    fit = bounds.log_growth_fit(list(zip(p, v)), kappa=2.0)
    assert fit.c0 == pytest.approx(0.3) and fit.c1 == pytest.approx(-1.7)
    assert fit.residual < 1e-12


def test_log_growth_fit_detects_power_growth():
    p = np.geomspace(10.0, 200.0, 10)
    fit = bounds.log_growth_fit(list(zip(p, p**2)), kappa=1.0)
    assert fit.residual > 0.05


@pytest.mark.parametrize("p", [np.geomspace(10, 200, 7), np.geomspace(3, 200, 10), np.geomspace(10, 90, 10)])
def test_log_growth_fit_input_errors(p):
    with pytest.raises(ValueError):
        bounds.log_growth_fit(list(zip(p, np.log(p))), kappa=1.0)
