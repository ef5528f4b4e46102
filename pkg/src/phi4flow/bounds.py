"""Closed-form amplitude bounds and checks of computed amplitudes against them."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .model import MomentumConfig, eta
from .reports import CertReport


@dataclass(frozen=True)
class BoundParams:
    n: int
    l: int
    K: float
    kappa: float
    m: float
    p: float            # |p| = sup_i |p_i|
    w: int = 0
    eta: float | None = None   # sup(kappa, eta)^-|w| uses this when given

    def __post_init__(self):
        if self.n < 1 or self.l < 0:
            raise ValueError("need n >= 1, l >= 0")
        if not 0 <= self.w <= 3:
            raise ValueError("|w| must be 0..3")
        if self.K <= 0:
            raise ValueError("K must be positive")
        if not (self.m > 0 and self.kappa >= self.m):
            raise ValueError("need kappa >= m > 0")
        if self.p < 0:
            raise ValueError("|p| must be non-negative")


def log_argument(p: float, kappa: float, m: float) -> float:
    """log sup(|p|/kappa, kappa/m), natural log; >= 0 because kappa >= m."""
    return math.log(max(p / kappa, kappa / m))


def log_series(L: float, upper: int) -> float:
    """sum_{lam=0}^{upper} L^lam / (2^lam lam!), empty (zero) for upper < 0."""
    total, term = 0.0, 1.0
    for lam in range(upper + 1):
        if lam:
            term *= L / (2 * lam)
        total += term
    return total


def _log_factorial_ratio(a: int, b: int) -> float:
    return math.lgamma(a + 1) - math.lgamma(b + 1)


def theorem_bound(params: BoundParams) -> float:
    """Right-hand side of the final amplitude bound with constant K.

    2n > 2: kappa^{4-2n} K^{2l+n-2} (n+l)!/n! sum_{lam<=l} log^lam(..)/(2^lam lam!)
    2n = 2, l >= 1: sup(|p|,kappa)^2 K^{2l} l!/(l+1)^2 sum_{lam<=l-1} ...
    """
    P = params
    L = log_argument(P.p, P.kappa, P.m)
    if P.n >= 2:
        logv = (4 - 2 * P.n) * math.log(P.kappa) + (2 * P.l + P.n - 2) * math.log(P.K) + _log_factorial_ratio(P.n + P.l, P.n)
        return math.exp(logv) * log_series(L, P.l)
    if P.l < 1:
        raise ValueError("two-point bound requires l >= 1")
    logv = 2 * math.log(max(P.p, P.kappa)) + 2 * P.l * math.log(P.K) + math.lgamma(P.l + 1) - 2 * math.log(P.l + 1)
    return math.exp(logv) * log_series(L, P.l - 1)


PROPOSITION_CASES = (
    "2n>4",            # general irrelevant functions
    "2n=4,|w|>=1",
    "2n=4,|w|=0",
    "2n=4,p1=0",       # four-point function at zero first momentum
    "2n=2,|w|=3",
    "2n=2,|w|<=2",
    "2n=2,p=0",        # two-point function (|w| in {0, 2}) at zero momentum
)


def eta_factor(params: BoundParams, config: MomentumConfig | None = None, i: int = 1, j: int | None = None) -> float:
    """1/sup(kappa, eta_ij)^|w|; with a config and no j, the inf over j != i of that factor."""
    if params.w == 0:
        return 1.0
    if config is not None:
        js = [j] if j is not None else [k for k in range(1, len(config) + 1) if k != i]
        return min(max(params.kappa, eta(config, i, jj)) ** -params.w for jj in js)
    e = params.eta if params.eta is not None else 0.0
    return max(params.kappa, e) ** -params.w


def proposition_bound(params: BoundParams, case: str, config: MomentumConfig | None = None,
                      i: int = 1, j: int | None = None) -> float:
    """Right-hand side of the inductive bound (constant K) for the given case."""
    P = params
    if case not in PROPOSITION_CASES:
        raise ValueError(f"unknown case {case!r}; choose from {PROPOSITION_CASES}")
    L = log_argument(P.p, P.kappa, P.m)
    lK = math.log(P.K)
    ok = {
        "2n>4": P.n > 2,
        "2n=4,|w|>=1": P.n == 2 and P.w >= 1,
        "2n=4,|w|=0": P.n == 2 and P.w == 0,
        "2n=4,p1=0": P.n == 2 and P.w == 0,
        "2n=2,|w|=3": P.n == 1 and P.w == 3,
        "2n=2,|w|<=2": P.n == 1 and P.w <= 2 and P.l >= 2,
        "2n=2,p=0": P.n == 1 and P.w in (0, 2) and P.l >= 2,
    }[case]
    if not ok:
        raise ValueError(f"parameters n={P.n}, l={P.l}, |w|={P.w} inconsistent with case {case!r}")
    if case == "2n>4":
        logv = ((4 - 2 * P.n) * math.log(P.kappa) + (2 * P.l + P.n - 2) * lK - 2 * math.log(P.l + 1)
                - math.lgamma(P.n + 1) - 3 * math.log(P.n) + math.lgamma(P.n + P.l))
        return math.exp(logv) * eta_factor(P, config, i, j) * log_series(L, P.l)
    if case.startswith("2n=4"):
        expo = 2 * P.l - 0.25 if case == "2n=4,|w|>=1" else 2 * P.l
        base = math.exp(expo * lK + math.lgamma(P.l + 2) - 2 * math.log(P.l + 1)) / 2**4
        if case == "2n=4,|w|>=1":
            return base * eta_factor(P, config, i, j) * log_series(L, P.l - 1)
        if case == "2n=4,|w|=0":
            return base * log_series(L, P.l - 1) * (1 + L)
        return base * log_series(L, P.l)
    pref = math.exp(math.lgamma(P.l + 1) - 2 * math.log(P.l + 1))
    if case == "2n=2,|w|=3":
        return max(P.p, P.kappa) ** -1 * math.exp((2 * P.l - 1.25) * lK) * pref * log_series(L, P.l - 2)
    if case == "2n=2,|w|<=2":
        return (max(P.p, P.kappa) ** (2 - P.w) * math.exp((2 * P.l - 1) * lK) * pref
                * log_series(L, P.l - 2) * (1 + L))
    return P.kappa ** (2 - P.w) * math.exp((2 * P.l - 1) * lK) * pref * log_series(math.log(P.kappa / P.m), P.l - 1)


def default_case(n: int, w: int, first_momentum_zero: bool = False, at_zero: bool = False) -> str:
    """Case selection; at a strictly zero first momentum the sharper form is used."""
    if n > 2:
        return "2n>4"
    if n == 2:
        if w >= 1:
            return "2n=4,|w|>=1"
        return "2n=4,p1=0" if first_momentum_zero else "2n=4,|w|=0"
    if w == 3:
        return "2n=2,|w|=3"
    if at_zero and w in (0, 2):
        return "2n=2,p=0"
    return "2n=2,|w|<=2"


# ---------------------------------------------------------------- amplitude checks

@dataclass(frozen=True)
class AmplitudeNode:
    """One computed amplitude value with the kinematic data a bound needs."""

    n: int
    l: int
    p: float       # sup_i |p_i|
    lam: float
    m: float
    value: float
    where: str = ""


def unit_coupling(value: float, g: float, n: int, l: int) -> float:
    """Strip the (g/4!)^{n+l-1} weight so values compare with the constant-K bounds."""
    return value / (g / 24.0) ** (n + l - 1)


def check_amplitude(nodes: Iterable[AmplitudeNode] | object, K: float, g: float = 1.0, unit_coupling_convention: bool = True,
                    label: str = "theorem bound") -> CertReport:
    """Check |value| <= theorem_bound at every node; worst margin = min bound/|value|."""
    if hasattr(nodes, "nodes"):
        nodes = nodes.nodes()
    nodes = list(nodes)
    rep = CertReport("bounds", f"{len(nodes)} amplitude nodes, K = {K:g}, "
                               f"{'unit-coupling' if unit_coupling_convention else 'explicit g/4!'} convention")
    if K <= 0:
        raise ValueError("K must be positive")
    worst_margin, worst_node = math.inf, None
    failures = 0
    for nd in nodes:
        v = unit_coupling(nd.value, g, nd.n, nd.l) if unit_coupling_convention else nd.value
        kappa = nd.lam + nd.m
        if nd.n == 1 and nd.l == 0:
            continue          # two-point tree vanishes identically
        b = theorem_bound(BoundParams(nd.n, nd.l, K, kappa, nd.m, nd.p))
        margin = b / abs(v) if v != 0 else math.inf
        if abs(v) > b:
            failures += 1
        if margin < worst_margin:
            worst_margin, worst_node = margin, nd
    rep.add(f"{label}: nodes with |value| > bound", 0.0, float(failures),
            note=(f"worst margin bound/|value| = {worst_margin:.6g} at {worst_node}" if worst_node else "no nodes"))
    rep.info["worst_margin"] = worst_margin
    rep.info["worst_node"] = None if worst_node is None else worst_node.__dict__
    rep.info["nodes"] = len(nodes)
    return rep


# ---------------------------------------------------------------- log growth

@dataclass(frozen=True)
class LogFit:
    c0: float
    c1: float
    residual: float


def log_growth_fit(samples: Sequence[tuple[float, float]], kappa: float) -> LogFit:
    """Least squares value ~ c0 + c1 log(|p|/kappa); residual = max relative deviation."""
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 8:
        raise ValueError("need at least 8 samples")
    p, v = arr[:, 0], arr[:, 1]
    if np.any(p <= 4 * kappa):
        raise ValueError("all samples need |p| > 4 kappa")
    if p.max() / p.min() < 10 * (1 - 1e-12):
        raise ValueError("samples must span at least one decade in |p|")
    x = np.log(p / kappa)
    A = np.column_stack([np.ones_like(x), x])
    (c0, c1), *_ = np.linalg.lstsq(A, v, rcond=None)
    fit = c0 + c1 * x
    scale = np.where(v != 0, np.abs(v), 1.0)
    return LogFit(float(c0), float(c1), float(np.max(np.abs(fit - v) / scale)))
