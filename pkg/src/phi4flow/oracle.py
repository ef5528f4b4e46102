"""Low-order amplitudes straight from Feynman graphs.

These are deliberately written without any of the flow solver's machinery:
scalar ``math`` integrands, nested adaptive ``scipy.integrate.quad`` with its
own variable substitutions, and explicit enumeration of labeled tree graphs.
Conventions: vertex factor -g, propagator C^{Lam,Lam0}, and
L_{2n} = -W_{2n}/(2n)! for the amputated connected sum W_{2n}.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .model import FlowScales, MomentumConfig

SIXTEEN_PI2 = 16 * math.pi**2


@dataclass(frozen=True)
class OracleResult:
    value: float
    method: str          # "closed-form", "1D-quadrature", "2D-quadrature"
    error_estimate: float

    def __post_init__(self):
        if not self.error_estimate >= 0:
            raise ValueError("error_estimate must be non-negative")


def _prop(p_sq: float, lam: float, lam0: float, m: float) -> float:
    z = p_sq + m * m
    hi = math.exp(-z / lam0**2)
    lo = math.exp(-z / lam**2) if lam * lam > 0 else 0.0
    return (hi - lo) / z


# ---------------------------------------------------------------- tadpole

def tadpole_closed_form(lam: float, m: float, g: float) -> float:
    """Renormalized tadpole via the exponential integral: vanishes at Lam = 0."""
    if lam <= 0:
        return 0.0
    u = (m / lam) ** 2
    inner = 0.5 * lam * lam * math.exp(-u) - 0.5 * m * m * float(special.exp1(u))
    return -12.0 / SIXTEEN_PI2 * (g / 24.0) * inner


def tadpole_l1(scales: FlowScales, g: float, method: str = "quadrature") -> OracleResult:
    """One-loop two-point function with the renormalization condition at Lam = 0.

    6 (g/4!) int_0^Lam dL' (-2/L'^3) e^{-m^2/L'^2} L'^4/(16 pi^2)
    """
    lam, m = scales.lam, scales.m
    if lam < 0:
        raise ValueError("Lam must be >= 0")
    if method == "closed-form":
        v = tadpole_closed_form(lam, m, g)
        return OracleResult(v, "closed-form", 1e-15 * abs(v))
    if lam == 0:
        return OracleResult(0.0, "1D-quadrature", 0.0)
    pref = 6 * (g / 24.0) * (-2.0) / SIXTEEN_PI2

    def f(x):
        return x * math.exp(-(m / x) ** 2) if x > 0 else 0.0

    pts = [p for p in (0.3 * m, m, 3 * m) if p < lam]
    v1, e1 = integrate.quad(f, 0.0, lam, points=pts or None, epsabs=0.0, epsrel=1e-10, limit=200)
    v2, e2 = integrate.quad(f, 0.0, lam, points=pts or None, epsabs=0.0, epsrel=1e-13, limit=400)
    err = abs(pref) * (abs(v1 - v2) + e2)
    return OracleResult(pref * v2, "1D-quadrature", err)


# ---------------------------------------------------------------- bubble

def _bubble_difference(P: float, lam: float, lam0: float, m: float, epsrel: float,
                       epsabs: float = 0.0) -> tuple[float, float]:
    """int_k [C^Lam(k) C^Lam(k+P) - C^0(k)^2] with integrand-level subtraction.

    Radial variable k = e^s; angle phi between k and -P (phi = 0 anti-parallel),
    d^4k/(2 pi)^4 = k^3 dk sin^2(phi) dphi / (4 pi^3).
    """
    def inner(k):
        c0 = _prop(k * k, 0.0, lam0, m)
        ck = _prop(k * k, lam, lam0, m)

        def g(phi):
            q2 = k * k + P * P - 2 * k * P * math.cos(phi)
            return math.sin(phi) ** 2 * (ck * _prop(max(q2, 0.0), lam, lam0, m) - c0 * c0)

        pts = None
        if P > 0 and k > 0:
            width = math.sqrt(m * m + lam * lam) / math.sqrt(k * P)
            pts = [w for w in (0.25 * width, width, 4 * width) if w < math.pi] or None
        v, _ = integrate.quad(g, 0.0, math.pi, points=pts, epsabs=1e-3 * epsrel * c0 * c0,
                              epsrel=epsrel, limit=200)
        return v

    def outer(s):
        k = math.exp(s)
        return k**4 * inner(k)

    cuts = sorted({math.log(x) for x in (m, lam if lam > 0 else m, P if P > 0 else m, lam0, 0.1 * m)})
    lo, hi = math.log(1e-6 * m), math.log(12 * lam0)
    edges = [lo] + [c for c in cuts if lo < c < hi] + [hi]
    total, err = 0.0, 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        v, e = integrate.quad(outer, a, b, epsabs=epsabs * 4 * math.pi**3, epsrel=epsrel, limit=500)
        total += v
        err += e
    return total / (4 * math.pi**3), err / (4 * math.pi**3)


def four_point_family_momenta(config: MomentumConfig) -> tuple[np.ndarray, np.ndarray]:
    """The vectors p, q of a (p, -p, q, -q) configuration."""
    P = config.momenta
    if len(config) != 4 or not (np.allclose(P[0], -P[1], atol=1e-12) and np.allclose(P[2], -P[3], atol=1e-12)):
        raise ValueError("bubble oracle needs a configuration of the form (p, -p, q, -q)")
    return P[0], P[2]


def bubble_l1(config: MomentumConfig, scales: FlowScales, g: float, epsrel: float = 1e-9) -> OracleResult:
    """Renormalized one-loop four-point function on (p, -p, q, -q).

    -12 (g/4!)^2 sum_{s,t,u} [B^Lam(P_c) - B^0(0)] - 2 (g/4!) T^Lam sum_i C^Lam(p_i)
    with B^Lam(P) = int_k C^Lam(k) C^Lam(k+P) and T the renormalized tadpole.
    """
    p, q = four_point_family_momenta(config)
    lam, lam0, m = scales.lam, scales.lam0, scales.m
    channels = [0.0, float(np.linalg.norm(p + q)), float(np.linalg.norm(p - q))]
    vals = []
    errs = []
    # B is dimensionless; its natural size is 1/(16 pi^2)
    floors = [1e-4 * epsrel / SIXTEEN_PI2] * len(channels)
    for tol in (epsrel * 100, epsrel):
        s, e = 0.0, 0.0
        for i, P in enumerate(channels):
            # the coarse pass sets an absolute floor for the refined one
            v, ev = _bubble_difference(P, lam, lam0, m, tol, floors[i])
            floors[i] = max(1e-2 * epsrel * abs(v), 1e-6 * epsrel / SIXTEEN_PI2)
            s += v
            e += ev
        vals.append(s)
        errs.append(e)
    coupling = g / 24.0
    value = -12 * coupling**2 * vals[1]
    err = 12 * coupling**2 * (abs(vals[1] - vals[0]) + errs[1])
    if lam > 0:
        T = tadpole_l1(scales, g)
        legs = sum(_prop(float(np.dot(v, v)), lam, lam0, m) for v in config.momenta)
        value += -2 * coupling * T.value * legs
        err += 2 * coupling * T.error_estimate * legs
    return OracleResult(value, "2D-quadrature", err)


def bubble_schwinger(P: float, lam: float, lam0: float, m: float) -> float:
    """B^Lam(P) from the Schwinger parametrization (used only as a cross-check).

    B = (16 pi^2)^-1 int int_{[1/Lam0^2, 1/Lam^2]^2} da db e^{-(a+b) m^2 - a b P^2/(a+b)}/(a+b)^2
    """
    lo = math.log(1 / lam0**2)
    hi = math.log(1 / lam**2) if lam > 0 else math.log(60 / m**2)

    def f(y, x):
        a, b = math.exp(x), math.exp(y)
        s = a + b
        return a * b * math.exp(-s * m * m - a * b * P * P / s) / (s * s)

    def inner(x):
        return integrate.quad(f, lo, hi, args=(x,), points=[x], epsabs=0.0, epsrel=1e-12, limit=200)[0]

    v, _ = integrate.quad(inner, lo, hi, epsabs=0.0, epsrel=1e-11, limit=200)
    return v / SIXTEEN_PI2


# ---------------------------------------------------------------- trees

def _labeled_trees(nlegs: int):
    """Labeled phi^4 trees as lists of internal-line leg subsets (one side of each cut)."""
    legs = tuple(range(nlegs))
    if nlegs == 4:
        yield []
        return
    if nlegs == 6:
        # two vertices, one line: split legs 3 + 3
        for A in itertools.combinations(legs, 3):
            if 0 in A:
                yield [frozenset(A)]
        return
    if nlegs == 8:
        # three vertices in a chain: middle vertex takes 2 legs, the ends 3 each
        for M in itertools.combinations(legs, 2):
            rest = [x for x in legs if x not in M]
            for A in itertools.combinations(rest, 3):
                if rest[0] in A:
                    B = frozenset(rest) - frozenset(A)
                    yield [frozenset(A), B]
        return
    raise ValueError(f"tree enumeration supports 2n in (4, 6, 8), got {nlegs}")


def tree_graph_enumeration(config: MomentumConfig, scales: FlowScales, g: float) -> float:
    """-(1/(2n)!) sum over labeled trees of (-g)^{n-1} prod C^{Lam,Lam0}(P_line)."""
    nlegs = len(config)
    if nlegs == 2:
        return 0.0
    P = config.momenta
    total = 0.0
    count = 0
    for lines in _labeled_trees(nlegs):
        prod = 1.0
        for S in lines:
            mom = P[list(S)].sum(axis=0)
            prod *= _prop(float(np.dot(mom, mom)), scales.lam, scales.lam0, scales.m)
        total += prod
        count += 1
    n = nlegs // 2
    return -((-g) ** (n - 1)) * total / math.factorial(nlegs)


def tree_count(nlegs: int) -> int:
    return sum(1 for _ in _labeled_trees(nlegs))
