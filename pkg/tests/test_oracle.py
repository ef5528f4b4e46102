from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phi4flow import oracle
from phi4flow.model import FlowScales, MomentumConfig, make_family


@given(st.floats(0.05, 50.0), st.floats(0.3, 3.0))
@settings(max_examples=40, deadline=None)
def test_tadpole_closed_form_matches_quadrature(lam, m):
    sc = FlowScales(lam, 100.0, m)
    q = oracle.tadpole_l1(sc, 1.0)
    c = oracle.tadpole_l1(sc, 1.0, method="closed-form")
    assert q.value == pytest.approx(c.value, rel=1e-9, abs=1e-300)
    assert q.error_estimate <= 1e-8 * abs(q.value)


def test_tadpole_vanishes_at_zero_and_is_negative():
    assert oracle.tadpole_l1(FlowScales(0.0, 10.0), 1.0).value == 0.0
    assert oracle.tadpole_closed_form(0.0, 1.0, 1.0) == 0.0
    assert oracle.tadpole_closed_form(2.0, 1.0, 1.0) < 0


def test_tadpole_lambda_derivative():
    lam, h = 1.7, 1e-4
    d = (oracle.tadpole_closed_form(lam + h, 1.0, 1.0) - oracle.tadpole_closed_form(lam - h, 1.0, 1.0)) / (2 * h)
    expected = 6 / 24 * (-2) / (16 * math.pi**2) * lam * math.exp(-1 / lam**2)
    assert d == pytest.approx(expected, rel=1e-7)


def test_tadpole_rejects_negative_scale():
    class Bad:
        lam, m = -1.0, 1.0
    with pytest.raises(ValueError):
        oracle.tadpole_l1(Bad(), 1.0)


@pytest.mark.parametrize("P,lam", [(0.0, 0.5), (1.0, 0.0), (3.0, 2.0), (0.2, 7.0)])
def test_bubble_direct_matches_schwinger(P, lam):
    lam0 = 50.0
    direct, _ = oracle._bubble_difference(P, lam, lam0, 1.0, 1e-10)
    sch = oracle.bubble_schwinger(P, lam, lam0, 1.0) - oracle.bubble_schwinger(0.0, 0.0, lam0, 1.0)
    assert direct == pytest.approx(sch, rel=1e-7, abs=1e-12)


def test_bubble_renormalized_at_zero():
    cfg = make_family("four-point", 0.0, 0.0, 1.0)
    r = oracle.bubble_l1(cfg, FlowScales(0.0, 100.0), 1.0)
    assert abs(r.value) < 1e-12
    assert r.method == "2D-quadrature"


def test_bubble_insensitive_to_cutoff():
    cfg = make_family("four-point", 2.0, 1.0, 0.3)
    a = oracle.bubble_l1(cfg, FlowScales(1.0, 100.0), 1.0).value
    b = oracle.bubble_l1(cfg, FlowScales(1.0, 400.0), 1.0).value
    assert a == pytest.approx(b, rel=1e-3)


def test_bubble_requires_pair_configuration():
    p = np.array([1.0, 0, 0, 0])
    q = np.array([0, 2.0, 0, 0])
    cfg = MomentumConfig([p, q, -p, -q])
    with pytest.raises(ValueError):
        oracle.bubble_l1(cfg, FlowScales(1.0, 10.0), 1.0)


def test_tree_counts():
    assert [oracle.tree_count(k) for k in (4, 6, 8)] == [1, 10, 280]
    with pytest.raises(ValueError):
        oracle.tree_count(10)


def test_tree_values_at_zero_momentum():
    sc = FlowScales(0.5, 20.0, 1.0)
    c0 = oracle._prop(0.0, sc.lam, sc.lam0, sc.m)
    g = 1.3
    assert oracle.tree_graph_enumeration(make_family("zero", 4), sc, g) == pytest.approx(g / 24)
    assert oracle.tree_graph_enumeration(make_family("zero", 6), sc, g) == pytest.approx(-g * g * 10 * c0 / 720)
    assert oracle.tree_graph_enumeration(make_family("zero", 8), sc, g) == pytest.approx(g**3 * 280 * c0**2 / 40320)
    assert oracle.tree_graph_enumeration(make_family("zero", 2), sc, g) == 0.0


def test_oracle_result_rejects_negative_error():
    with pytest.raises(ValueError):
        oracle.OracleResult(1.0, "closed-form", -1.0)
