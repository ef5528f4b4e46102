from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phi4flow import lemmas
from phi4flow.constants import DEFAULT


def _lemma2_brute(n, l, n1_values):
    """Direct factorial form of the double convolution sum."""
    f = math.factorial
    out = []
    for lam in range(l + 1):
        acc = Fraction(0)
        for n1 in n1_values:
            n2 = n + 1 - n1
            for l1 in range(l + 1):
                l2 = l - l1
                w = Fraction(f(n) * f(n1 + l1 - 1) * f(n2 + l2 - 1),
                             f(n1) * f(n2) * f(n + l - 1) * n1**2 * n2**2 * (l1 + 1) ** 2 * (l2 + 1) ** 2)
                for lam1 in range(0, min(l1, lam) + 1):
                    lam2 = lam - lam1
                    if lam2 <= l2:
                        acc += w * Fraction(f(lam), f(lam1) * f(lam2))
        out.append(acc)
    return out


@given(st.integers(2, 7), st.integers(0, 6))
@settings(max_examples=40, deadline=None)
def test_lemma2_lhs_matches_factorial_definition(n, l):
    for n1s in (range(1, n + 1), [1], range(2, n) if n >= 3 else [1]):
        assert lemmas.lemma2_lhs(n, l, n1s) == _lemma2_brute(n, l, list(n1s))


def test_lemma1_small_domain_passes():
    rep = lemmas.verify_lemma1(l_max=40, n_max=40, exact_max=15)
    assert rep.passed, rep.summary()


def test_lemma1_diagonal_values_by_hand():
    # l = 0: the single term 1, against 5; l = 1: 1/4 + 1/4 against 5/4
    s0, s1 = lemmas._lemma1_sums(1)
    assert s0 == Fraction(1, 2) and s1 == 0
    t0, _ = lemmas._lemma1_nsums(1)
    assert t0 == 1


def test_lemma1_rejects_empty_domain():
    with pytest.raises(ValueError):
        lemmas.verify_lemma1(l_max=0)


def test_lemma2_small_domain_passes():
    rep = lemmas.verify_lemma2(n_max=8, l_max=8, inner_max=25)
    assert rep.passed, rep.summary()


def test_lemma2_detects_corrupted_constant():
    bad = DEFAULT.replace("K0", 0.5)
    rep = lemmas.verify_lemma2(n_max=6, l_max=4, inner_max=10, registry=bad)
    assert not rep.passed
    assert any(c.name.startswith("a) all n1") for c in rep.failures)


def test_lemma3_passes_and_detects_corruption():
    assert lemmas.verify_lemma3(samples=40_000, seed=1).passed
    bad = DEFAULT.replace("c[2]", 1.0)
    rep = lemmas.verify_lemma3(samples=40_000, seed=1, registry=bad)
    assert not rep.passed


def test_lemma3_sup_constants_are_tight():
    for v, c in zip((1, 2, 3), DEFAULT.c[1:]):
        _, val = lemmas.sup_1d(lambda t: (1 + t) ** v * np.exp(-t * t / 2), 0.0, 10.0)
        assert 0.9 * c <= val <= c


def test_sup_1d_known_maximum():
    x, v = lemmas.sup_1d(lambda x: x * np.exp(-x * x / 2), 0.0, 10.0)
    assert x == pytest.approx(1.0, abs=1e-8)
    assert v == pytest.approx(math.exp(-0.5), rel=1e-12)


def test_sup_poly_gauss_satisfies_stationarity():
    for power in (3, 5):
        y, _ = lemmas.sup_poly_gauss(power)
        # the maximizer of a flat peak is only located to ~sqrt(machine eps)
        assert 2 * y * (1 + y) == pytest.approx(power, rel=1e-6)


def test_gaussian_moment_normalization():
    assert lemmas.gaussian_log_moment(0, 0.0) * 4 * math.pi**2 == pytest.approx(1.0, rel=1e-10)
    # the r = 0 moment does not depend on a
    assert lemmas.gaussian_log_moment(0, 7.0) == pytest.approx(lemmas.gaussian_log_moment(0, 0.0), rel=1e-10)


def test_lemma4_passes():
    rep = lemmas.verify_lemma4(r_max=12, a_grid=[0.0, 0.1, 1.0, 10.0, 1e3])
    assert rep.passed, rep.summary()
    with pytest.raises(ValueError):
        lemmas.verify_lemma4(r_max=41)


def test_lemma5_small_domain_passes():
    rep = lemmas.verify_lemma5(s_values=(1, 3), a_grid=(1.0, 100.0), kappa_grid=(1.0, 10.0), M_factors=(3.0,), l_max=6)
    assert rep.passed, rep.summary()


def test_lemma6_exact_sups():
    rep = lemmas.verify_lemma6_constants()
    by_name = {c.name: c for c in rep.checks}
    assert by_name["a) sup x^2 e^(-x^2/2) = 2/e"].passed
    assert by_name["c) sup x^3 e^(-x^2/2) = (3/e)^(3/2)"].passed
    assert by_name["K2 = 2 sup (1+x)^3 e^(-x^2)"].passed


def test_lemma6_order_one_counterexample():
    # at Lam = m = 1 and |p| = 1/sqrt(2) the first derivative bound exceeds the full-width K^(1)
    v = lemmas.lemma6_statement_value(1, "full", np.array([1 / math.sqrt(2)]), np.array([1.0]))[0, 0]
    assert v > DEFAULT.k_w[1]


def test_lemma6_rejects_bad_order():
    with pytest.raises(ValueError):
        lemmas.lemma6_proof_branches(4, "full")


def test_lemma7_integral_vanishes_at_kappa_equal_m():
    assert np.all(lemmas.lemma7_lhs(1.0, 3, 5) == 0)


def test_lemma7_k1_part_passes():
    rep = lemmas.verify_lemma7(lam_max=8, kappa_grid=np.geomspace(1.01, 1e4, 12))
    k1 = [c for c in rep.checks if c.name.startswith("K1:")]
    assert k1 and all(c.passed for c in k1)


def test_lemma8_passes_and_is_seeded():
    a = lemmas.verify_lemma8(samples=20_000, seed=3)
    b = lemmas.verify_lemma8(samples=20_000, seed=3)
    assert a.passed
    assert a.to_dict() == b.to_dict()


def test_run_lemmas_selection_and_unknown():
    reps = lemmas.run_lemmas(["8", "1"])
    assert [r.lemma for r in reps] == ["lemma1", "lemma8"]
    with pytest.raises(KeyError):
        lemmas.run_lemmas(["9"])
