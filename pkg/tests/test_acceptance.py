"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line."""
from __future__ import annotations

import json
import time

import numpy as np
import pytest

from phi4flow.bounds import check_amplitude, log_growth_fit
from phi4flow.chain import ktilde
from phi4flow.cli import RENORM_TOL, main, oracle_comparison
from phi4flow.lemmas import run_lemmas
from phi4flow.model import make_family


def _verdict(number: int, title: str, ok: bool, detail: str) -> None:
    print(f"\nACCEPTANCE {number} {'PASS' if ok else 'FAIL'}: {title}: {detail}")


def test_criterion_1_constant_reproduction(tmp_path):
    t0 = time.perf_counter()
    code = main(["certify-k", "--threads", "1", "--output-dir", str(tmp_path)])
    elapsed = time.perf_counter() - t0
    doc = json.loads((tmp_path / "k_chain.json").read_text())["payload"]
    K, b = doc["K_star"], doc["binding"]
    kt, ktp = ktilde(3), ktilde(3, primed=True)
    checks = {
        "exit status 0": code == 0,
        "K* in [5.9e5, 6.5e5]": 5.9e5 <= K <= 6.5e5,
        "binding bdke at n=3, l=1, |w|=3": (b["id"], b["n"], b["l"], b["w"]) == ("bdke", 3, 1, 3),
        "runtime < 5 s": elapsed < 5.0,
        "Ktilde(3) = 606.8": abs(kt - 606.8) < 1e-9,
        "Ktilde'(3) = 1377.0": abs(ktp - 1377.0) < 1e-9,
    }
    ok = all(checks.values())
    bad = [k for k, v in checks.items() if not v]
    _verdict(1, "constant chain", ok,
             f"K* = {K:.6g}, binding {b['id']} (n={b['n']}, l={b['l']}, |w|={b['w']}), {elapsed:.2f} s, "
             f"Ktilde = {kt:.4f}, Ktilde' = {ktp:.4f}" + (f"; failing: {bad}" if bad else ""))
    assert ok, bad


def test_criterion_2_lemma_suite():
    t0 = time.perf_counter()
    reports = run_lemmas(seed=0, threads=1)
    elapsed = time.perf_counter() - t0
    failed = [r.lemma for r in reports if not r.passed]
    ok = not failed and len(reports) == 8 and elapsed < 60.0
    detail = f"{8 - len(failed)}/8 lemmas pass in {elapsed:.1f} s"
    if failed:
        names = [f"{r.lemma}: {c.name}" for r in reports for c in r.failures]
        detail += f"; failing checks: {names}"
    _verdict(2, "lemma suite", ok, detail)
    assert ok, detail


def test_criterion_3_oracle_equivalence(solver):
    rep = oracle_comparison(solver, seed=0, tree_samples=100)
    parts = [f"{c.name} = {c.computed:.2g} (tol {c.claimed:g})" for c in rep.checks]
    _verdict(3, "oracle equivalence", rep.passed, "; ".join(parts))
    assert rep.passed


def test_criterion_4_renormalization_conditions(solver):
    res = solver.renormalization_residuals()
    m = solver.config.m
    worst = {k: abs(v) / (RENORM_TOL[k] * (m * m if k.startswith("L2") else 1.0)) for k, v in res.items()}
    needed = {"L2,1(0)", "dp2 L2,1(0)", "L4,1(0)", "L2,2(0)", "dp2 L2,2(0)"}
    ok = set(res) == needed and all(v <= 1.0 for v in worst.values())
    _verdict(4, "renormalization conditions", ok, ", ".join(f"|{k}| = {abs(v):.2e}" for k, v in res.items()))
    assert ok


def test_criterion_5_bound_satisfaction(solver):
    nodes = [nd for l in (0, 1, 2) for t in solver.tables(l).values() for nd in t.nodes()]
    g = solver.config.g
    good = check_amplitude(nodes, 6.2e5, g=g)
    bad = check_amplitude(nodes, 1e-3, g=g)
    ok = good.passed and not bad.passed
    _verdict(5, "bound satisfaction", ok,
             f"{len(nodes)} nodes; K = 6.2e5: {int(good.checks[0].computed)} violations, worst margin "
             f"{good.info['worst_margin']:.3g}; K = 1e-3: {int(bad.checks[0].computed)} violations")
    assert ok


@pytest.mark.slow
def test_criterion_6_log_growth(wide_solver):
    kappa = wide_solver.config.m        # Lam = 0
    ps = np.geomspace(8.0, 80.0, 12) * kappa
    samples = [(p, wide_solver.four_point_l1(make_family("four-point", p, p, 0.0), 0.0)) for p in ps]
    fit = log_growth_fit(samples, kappa)
    ok = fit.residual < 0.02
    _verdict(6, "log growth", ok, f"c0 = {fit.c0:.4g}, c1 = {fit.c1:.4g}, max relative residual {fit.residual:.3%}")
    assert ok
