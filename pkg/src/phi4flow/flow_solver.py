"""Order-by-order integration of the flow equations for the connected amputated functions.

Conventions: L_{2n,l} is the coefficient of hbar^l in the 2n-point CAG,
normalized so that L_{4,0} = g/4!.  The flow equation reads

  d/dLam L_{2n,l} = C(2n+2, 2) int_k dC(k) L_{2n+2,l-1}(k, -k, p)
                    - sum 2 n1 n2 [L_{2n1,l1}(p_I, q) dC(q) L_{2n2,l2}(-q, p_J)]_sy

with int_k = (2 pi)^-4 int d^4k and dC = d/dLam C^{Lam,Lam0}.

Trees are integrated symbolically: each L_{2n,0} is a polynomial in channel
propagators and the flow is checked to be an exact Lam-derivative.  Loop
orders are integrated numerically in t = log Lam with an explicit RK method.
Every source term at order l depends only on lower orders, so each state
component J(Lam) = int_{Lam_lo}^{Lam} rhs is integrated upward from
Lam_lo = lam_lo * m, below which all sources carry exp(-m^2/Lam^2) and are
negligible.  The amplitude is then L^Lam = L^{Lam0} + J(Lam) - J(Lam0);
relevant parts get L^{Lam0} from the bare counterterms, fixed by affine
shooting on the renormalization conditions at Lam = 0, irrelevant parts have
L^{Lam0} = 0.

The one-loop four-point function is kept in channel form

  L_{4,1}(p1..p4) = c_1/4! + sum_{pairs i<j} F(|p_i+p_j|) + sum_i G(|p_i|)

which is exactly what the flow generates at this order; F and G are
tabulated on a sinh-spaced momentum grid and interpolated with cubic splines.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline, RegularGridInterpolator

from .bounds import AmplitudeNode
from .model import DomainError, FlowScales, MomentumConfig, make_family

# ---------------------------------------------------------------- configuration


@dataclass(frozen=True)
class SolverConfig:
    g: float = 1.0
    m: float = 1.0
    lam0: float = 100.0
    l_max: int = 2
    p_max: float = 10.0                 # largest tabulated external momentum, units of m
    momentum_nodes: int = 241           # channel-function grid size
    two_point_nodes: int = 41
    radial_panels: tuple = (0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.5, 8.0)  # k / Lam
    radial_order: int = 8
    angular_panels: tuple = (0.0, math.pi / 32, math.pi / 8, math.pi / 4, math.pi / 2, math.pi)
    angular_order: int = 8
    rtol: float = 1e-9
    atol: float = 1e-20
    lam_lo: float = 0.1                 # lower end of the numerical flow, units of m
    richardson_h: float = 0.05          # step for d/dp^2 at p = 0, units of m
    lam_table: tuple = (0.0, 0.25, 0.5, 1.0, 2.0, 3.0, 5.0, 10.0, 20.0, 50.0, 100.0)
    method: str = "DOP853"
    threads: int = 1

    def __post_init__(self):
        if not (self.g > 0 and self.m > 0):
            raise ValueError("need g > 0 and m > 0")
        if not self.lam0 > 10 * self.m:
            raise ValueError("need lam0 > 10 m")
        if self.l_max not in (0, 1, 2):
            raise ValueError("loop orders up to l = 2 are supported")
        if self.p_max <= 2 * self.richardson_h * self.m:
            raise ValueError("p_max too small")
        if self.momentum_nodes < 16 or self.two_point_nodes < 8:
            raise ValueError("momentum grids too coarse")
        if not 0 < self.lam_lo <= 0.2:
            raise ValueError("lam_lo must lie in (0, 0.2]")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def with_(self, **kw) -> "SolverConfig":
        d = dict(self.__dict__)
        d.update(kw)
        return SolverConfig(**d)


@dataclass
class CountertermSet:
    """Bare couplings per loop order: a_l (mass), b_l (wave function), c_l (four-point)."""

    a: dict = field(default_factory=dict)
    b: dict = field(default_factory=dict)
    c: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"a": dict(self.a), "b": dict(self.b), "c": dict(self.c)}


# ---------------------------------------------------------------- tree polynomials


def _canon(mask: int, nlegs: int) -> int:
    """Subset and complement carry the same |momentum|; keep the one with leg 0."""
    return mask if mask & 1 else ((1 << nlegs) - 1) ^ mask


def _relabel(mono, leg_masks, nlegs):
    out = []
    for S in mono:
        g = 0
        for k, lm in enumerate(leg_masks):
            if S >> k & 1:
                g |= lm
        out.append(_canon(g, nlegs))
    return out


class ExactnessError(RuntimeError):
    """The tree flow was not an exact Lam-derivative of a propagator polynomial."""


@lru_cache(maxsize=None)
def tree_polynomial(n: int) -> tuple:
    """L_{2n,0} = g^{n-1} sum coeff * prod_S C(P_S) as ((masks, coeff), ...).

    Masks are bit sets of legs (canonical: containing leg 0).  Obtained by
    integrating the bilinear flow term from Lam0, where all trees vanish.
    """
    if n < 2:
        raise ValueError("trees start at 2n = 4")
    if n == 2:
        return (((), Fraction(1, 24)),)
    nlegs = 2 * n
    full = (1 << nlegs) - 1
    rhs: dict = {}
    for n1 in range(2, n):
        n2 = n + 1 - n1
        weight = Fraction(-2 * n1 * n2, math.comb(nlegs, 2 * n1 - 1))
        for I in itertools.combinations(range(nlegs), 2 * n1 - 1):
            Imask = sum(1 << i for i in I)
            Jmask = full ^ Imask
            J = [j for j in range(nlegs) if Jmask >> j & 1]
            map1 = [1 << i for i in I] + [Jmask]     # L(p_I, q) with q = sum_J p
            map2 = [Imask] + [1 << j for j in J]     # L(-q, p_J)
            dot = _canon(Imask, nlegs)
            for m1, c1 in tree_polynomial(n1):
                g1 = _relabel(m1, map1, nlegs)
                for m2, c2 in tree_polynomial(n2):
                    g2 = _relabel(m2, map2, nlegs)
                    full_mono = tuple(sorted(g1 + g2 + [dot]))
                    per = rhs.setdefault(full_mono, {})
                    per[dot] = per.get(dot, Fraction(0)) + weight * c1 * c2
    poly = []
    for mono, per in sorted(rhs.items()):
        mult = {f: mono.count(f) for f in set(mono)}
        coeffs = {per.get(f, Fraction(0)) / mult[f] for f in mult}
        if len(coeffs) != 1:
            raise ExactnessError(f"2n={nlegs}: monomial {mono} has inconsistent derivative weights {coeffs}")
        (b,) = coeffs
        if b:
            poly.append((mono, b))
    return tuple(poly)


def _mask_momentum(mask: int, P: np.ndarray) -> np.ndarray:
    idx = [i for i in range(P.shape[0]) if mask >> i & 1]
    return P[idx].sum(axis=0)


def tree_cag(config: MomentumConfig, scales: FlowScales, g: float) -> float:
    """Tree-level L_{2n,0} from the exactly integrated symbolic flow."""
    n = config.n
    if n == 1:
        return 0.0
    P = config.momenta
    total = 0.0
    for mono, coeff in tree_polynomial(n):
        prod = 1.0
        for S in mono:
            v = _mask_momentum(S, P)
            prod *= _prop(float(v @ v), scales.lam, scales.lam0, scales.m)
        total += float(coeff) * prod
    return g ** (n - 1) * total


def loop_channel_weights(n: int) -> tuple[dict, dict, Fraction]:
    """Split C(2n+2,2) L_{2n+2,0}(k, -k, p_1..p_2n) into k-dependent and k-free channels.

    Returns (pair, leg, const): pair[mask] is the weight of int dC(k) C(k + P_mask),
    leg[mask] the weight of C(P_mask) int dC(k), const the weight of int dC(k),
    all as multiples of g^n.  Legs 0, 1 carry k, -k; masks refer to the 2n external legs.
    """
    pair: dict = {}
    leg: dict = {}
    const = Fraction(0)
    pref = math.comb(2 * n + 2, 2)
    for mono, coeff in tree_polynomial(n + 1):
        if len(mono) > 1:
            raise NotImplementedError("loop terms with more than one internal tree line")
        w = pref * coeff
        if not mono:
            const += w
            continue
        (S,) = mono
        ext = S >> 2
        if S & 2:
            leg[ext] = leg.get(ext, Fraction(0)) + w
        else:
            pair[ext] = pair.get(ext, Fraction(0)) + w
    return pair, leg, const


# ---------------------------------------------------------------- numerics


def _prop(p_sq, lam: float, lam0: float, m: float):
    """C^{Lam,Lam0} with expm1 so that Lam near Lam0 loses no digits."""
    z = np.asarray(p_sq, dtype=float) + m * m
    if lam * lam == 0:          # also catches Lam^2 underflow
        return np.exp(-z / lam0**2) / z
    return -np.exp(-z / lam0**2) * np.expm1(-z * (1 / lam**2 - 1 / lam0**2)) / z


def _dprop(p_sq, lam: float, m: float):
    z = np.asarray(p_sq, dtype=float) + m * m
    if lam * lam == 0:
        return np.zeros_like(z)
    # the Lam^-3 prefactor is folded into the exponent so tiny Lam cannot overflow
    return -2.0 * np.exp(-z / lam**2 - 3 * math.log(lam))


def _gauss_panels(edges, order):
    x, w = np.polynomial.legendre.leggauss(order)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        nodes.append(0.5 * (b - a) * x + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * w)
    return np.concatenate(nodes), np.concatenate(weights)


class _Integral:
    """J(Lam) = int_{Lam_lo}^{Lam} rhs for a vector state, from a dense RK solution."""

    def __init__(self, sol, lam_lo: float, lam0: float, size: int):
        self.sol = sol
        self.lam_lo = lam_lo
        self.lam0 = lam0
        self.size = size
        self.at_top = np.asarray(sol.sol(math.log(lam0))) if sol is not None else np.zeros(size)
        self.nfev = sol.nfev if sol is not None else 0

    def __call__(self, lam: float) -> np.ndarray:
        if lam <= self.lam_lo or self.sol is None:
            return np.zeros(self.size)
        return np.asarray(self.sol.sol(math.log(min(lam, self.lam0))))

    def irrelevant(self, lam: float) -> np.ndarray:
        """-int_Lam^{Lam0} rhs: vanishes at Lam0."""
        return self(lam) - self.at_top


# ---------------------------------------------------------------- tables


@dataclass
class AmplitudeTable:
    """Values of L_{2n,l} on a kinematic family x Lam grid."""

    n: int
    l: int
    family: str
    axes: dict                 # parameter name -> 1D array, then "lam"
    values: np.ndarray
    m: float = 1.0

    def __post_init__(self):
        shape = tuple(len(v) for v in self.axes.values())
        if self.values.shape != shape:
            raise ValueError(f"values shape {self.values.shape} does not match axes {shape}")

    def interpolate(self, *params: float) -> float:
        """Multilinear interpolation on the stored grid; params in axis order (lam last)."""
        grid = tuple(np.asarray(v, dtype=float) for v in self.axes.values())
        # singleton axes are not interpolated
        keep = [i for i, g in enumerate(grid) if len(g) > 1]
        point = np.asarray(params, dtype=float)
        for i, g in enumerate(grid):
            if len(g) == 1 and not math.isclose(point[i], g[0], abs_tol=1e-12):
                raise DomainError(f"axis {list(self.axes)[i]} is fixed at {g[0]}")
        vals = self.values.reshape([len(grid[i]) for i in keep])
        f = RegularGridInterpolator([grid[i] for i in keep], vals, method="linear", bounds_error=True)
        return float(f(point[keep])[0])

    def nodes(self):
        names = list(self.axes)
        for idx in itertools.product(*(range(len(v)) for v in self.axes.values())):
            params = {k: float(self.axes[k][i]) for k, i in zip(names, idx)}
            yield AmplitudeNode(self.n, self.l, _sup_p(self.family, params), params["lam"], self.m,
                                float(self.values[idx]), f"{self.family} {params}")

    def to_dict(self) -> dict:
        # axes as an ordered list: JSON objects are written with sorted keys
        return {"n": self.n, "l": self.l, "family": self.family, "m": self.m,
                "axes": [[k, list(map(float, v))] for k, v in self.axes.items()],
                "values": self.values.tolist()}


    @classmethod
    def from_dict(cls, d: dict) -> "AmplitudeTable":
        axes = {k: np.asarray(v, dtype=float) for k, v in d["axes"]}
        return cls(int(d["n"]), int(d["l"]), d["family"], axes, np.asarray(d["values"], dtype=float), float(d.get("m", 1.0)))


def _sup_p(family: str, params: dict) -> float:
    if family == "zero":
        return 0.0
    if family == "antipodal-pair":
        return params["p"]
    if family == "four-point":
        return max(params["p"], params["q"])
    raise DomainError(family)


# ---------------------------------------------------------------- the solver


class OrderingError(RuntimeError):
    """An amplitude was read before it was available in the inductive order."""


class FlowSolver:
    """Integrates the flow equations for l <= l_max on fixed kinematic grids."""

    def __init__(self, config: SolverConfig | None = None):
        self.config = config or SolverConfig()
        c = self.config
        self.coupling = c.g / 24.0
        self.scales0 = FlowScales(0.0, c.lam0, c.m)
        self.lam_lo = c.lam_lo * c.m
        self.radial_x, self.radial_w = _gauss_panels(np.asarray(c.radial_panels), c.radial_order)
        self.phi, wphi = _gauss_panels(np.asarray(c.angular_panels), c.angular_order)
        self.angular_w = wphi * np.sin(self.phi) ** 2
        self.cosphi = np.cos(self.phi)
        # channel momenta up to the largest |k + P| that the loop integrals probe
        P_top = c.radial_panels[-1] * c.lam0 + 4 * c.p_max * c.m
        self.u_grid = np.linspace(0.0, math.asinh(P_top / c.m), c.momentum_nodes)
        self.P_grid = c.m * np.sinh(self.u_grid)
        self.pu_grid = np.linspace(0.0, math.asinh(c.p_max), c.two_point_nodes)
        h = c.richardson_h * c.m
        self.p_grid = np.concatenate([c.m * np.sinh(self.pu_grid), [h, 2 * h]])
        self.counterterms = CountertermSet()
        self.access_log: list[tuple[tuple[int, int], tuple[int, int]]] = []
        self._current: tuple[int, int] | None = None
        self._done: set[tuple[int, int]] = set()
        self._J: dict = {}
        self.rhs_evaluations: dict = {}

    # ---------------- quadrature primitives

    def _radial(self, lam: float):
        k = lam * self.radial_x
        w = lam * self.radial_w * k**3 * _dprop(k * k, lam, self.config.m) / (4 * math.pi**3)
        return k, w

    def loop_dC(self, lam: float) -> float:
        """int_k dC(k); the angular integral of sin^2 over [0, pi] is pi/2."""
        _, w = self._radial(lam)
        return float(w.sum() * math.pi / 2)

    def loop_radial(self, lam: float, f: Callable[[np.ndarray], np.ndarray]) -> float:
        """int_k dC(k) f(|k|)."""
        k, w = self._radial(lam)
        return float((w * f(k)).sum() * math.pi / 2)

    def loop_channel(self, lam: float, P: np.ndarray, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """int_k dC(k) f(|k + P|) for each |P| in the array (radial x polar angle)."""
        P = np.atleast_1d(np.asarray(P, dtype=float))
        k, w = self._radial(lam)

        def block(Pb):
            q2 = (k[None, :, None] ** 2 + Pb[:, None, None] ** 2
                  - 2 * k[None, :, None] * Pb[:, None, None] * self.cosphi[None, None, :])
            vals = f(np.maximum(q2, 0.0))
            return np.einsum("pra,r,a->p", vals, w, self.angular_w)

        if self.config.threads > 1 and P.size > 32:
            chunks = np.array_split(P, self.config.threads)
            with ThreadPoolExecutor(self.config.threads) as ex:
                return np.concatenate(list(ex.map(block, chunks)))
        return block(P)

    # ---------------- bookkeeping

    def _read(self, n: int, l: int):
        if self._current is not None:
            cur = self._current
            self.access_log.append((cur, (n, l)))
            if l > 0 and (n, l) not in self._done and (n, l) != cur:
                raise OrderingError(f"computing (n={cur[0]}, l={cur[1]}) read unavailable (n={n}, l={l})")

    def _ensure(self, l: int):
        if l > self.config.l_max:
            raise DomainError(f"order l={l} exceeds l_max={self.config.l_max}")
        if l >= 1 and (1, 1) not in self._done:
            self._solve_l1_two_point()
            self._solve_l1_four_point()
        if l >= 2 and (1, 2) not in self._done:
            self._solve_l2_two_point()

    def solve(self, l_max: int | None = None) -> "FlowSolver":
        self._ensure(self.config.l_max if l_max is None else l_max)
        return self

    def _integrate(self, key: str, rhs, size: int) -> _Integral:
        c = self.config
        calls = [0]

        def f(t, y):
            calls[0] += 1
            lam = math.exp(t)
            return lam * rhs(lam)

        sol = solve_ivp(f, (math.log(self.lam_lo), math.log(c.lam0)), np.zeros(size), method=c.method,
                        rtol=c.rtol, atol=c.atol, dense_output=True)
        if not sol.success:
            raise RuntimeError(f"flow integration for {key} failed: {sol.message}")
        self.rhs_evaluations[key] = calls[0]
        J = _Integral(sol, self.lam_lo, c.lam0, size)
        self._J[key] = J
        return J

    # ---------------- l = 1

    def _rhs_l1_two_point(self, lam: float) -> np.ndarray:
        _, _, const = loop_channel_weights(1)
        return np.array([float(const) * self.config.g * self.loop_dC(lam)])

    def _solve_l1_two_point(self):
        self._current = (1, 1)
        self._read(2, 0)
        J = self._integrate("L2,1", self._rhs_l1_two_point, 1)
        # affine shooting: L(0) = a/2 * 1 + [J(0) - J(Lam0)]; the a-response is exactly 1/2
        base = float(J.irrelevant(0.0)[0])
        response = 0.5
        self.counterterms.a[1] = -base / response
        self._done.add((1, 1))
        self._current = None

    def two_point_l1(self, lam: float) -> float:
        self._read(1, 1)
        J = self._J["L2,1"]
        # fold the counterterm into the Lam0 offset first: both are large and cancel exactly
        return float((0.5 * self.counterterms.a[1] - J.at_top[0]) + J(lam)[0])

    def _rhs_l1_four_point(self, lam: float) -> np.ndarray:
        c = self.config
        pair, leg, const = loop_channel_weights(2)
        self._read(3, 0)
        wp = float(next(iter(pair.values()))) * c.g**2
        wl = float(next(iter(leg.values()))) * c.g**2
        if len(set(pair.values())) != 1 or len(set(leg.values())) != 1 or const:
            raise RuntimeError("unexpected channel structure of the six-point tree")
        P2 = self.P_grid**2
        F = wp * self.loop_channel(lam, self.P_grid, lambda q2: _prop(q2, lam, c.lam0, c.m))
        # bilinear term: -2 L_{4,0} L_{2,1} dC(p_i) on each leg
        T = self.two_point_l1(lam)
        self._read(2, 0)
        G = (wl * _prop(P2, lam, c.lam0, c.m) * self.loop_dC(lam)
             - 2 * self.coupling * T * _dprop(P2, lam, c.m))
        return np.concatenate([F, G])

    def _solve_l1_four_point(self):
        self._current = (2, 1)
        N = self.P_grid.size
        J = self._integrate("L4,1", self._rhs_l1_four_point, 2 * N)
        self._FG_top = J.at_top
        F0, G0 = self._channels(0.0)
        F0z, G0z = F0(0.0), G0(0.0)
        base = 6 * F0z + 4 * G0z
        self.counterterms.c[1] = -24.0 * base    # response of L_{4,1} to c_1 is exactly 1/4!
        self._done.add((2, 1))
        self._current = None

    @lru_cache(maxsize=256)
    def _channels(self, lam: float):
        """Splines F(|P|), G(|p|) of the one-loop four-point channel functions at Lam."""
        N = self.P_grid.size
        vals = self._J["L4,1"].irrelevant(lam)
        bc = ((1, 0.0), "not-a-knot")
        Fs = CubicSpline(self.u_grid, vals[:N], bc_type=bc)
        Gs = CubicSpline(self.u_grid, vals[N:], bc_type=bc)
        m = self.config.m
        top = self.P_grid[-1]

        def wrap(s):
            def f(p):
                p = np.asarray(p, dtype=float)
                if np.any(p > top * (1 + 1e-12)):
                    raise DomainError("momentum beyond the channel grid")
                return s(np.arcsinh(p / m))
            return f

        return wrap(Fs), wrap(Gs)

    def four_point_l1(self, config: MomentumConfig, lam: float) -> float:
        self._read(2, 1)
        F, G = self._channels(float(lam))
        P = config.momenta
        total = self.counterterms.c[1] / 24.0
        for i, j in itertools.combinations(range(4), 2):
            total += float(F(np.linalg.norm(P[i] + P[j])))
        total += float(np.sum(G(np.linalg.norm(P, axis=1))))
        return total

    # ---------------- l = 2

    def _rhs_l2_two_point(self, lam: float) -> np.ndarray:
        c = self.config
        self._read(2, 1)
        self._read(1, 1)
        F, G = self._channels(float(lam))
        p = self.p_grid
        # 6 int dC(k) L_{4,1}(k, -k, p, -p), channels: pairs 0, 0, k+p, -k-p, k-p, -k+p; legs k, k, p, p
        const = self.counterterms.c[1] / 24.0 + 2 * float(F(0.0))
        I0 = self.loop_dC(lam)
        IG = self.loop_radial(lam, lambda k: G(k))
        IF = self.loop_channel(lam, p, lambda q2: F(np.sqrt(q2)))
        loop = 6 * ((const + 2 * G(p)) * I0 + 2 * IG + 4 * IF)
        T = self.two_point_l1(lam)
        bil = -2 * T * T * _dprop(p**2, lam, c.m)
        return loop + bil

    def _solve_l2_two_point(self):
        self._current = (1, 2)
        J = self._integrate("L2,2", self._rhs_l2_two_point, self.p_grid.size)
        base = J.irrelevant(0.0)
        h = self.config.richardson_h * self.config.m
        d = richardson_p2_derivative(base[0], base[-2], base[-1], h)
        # affine responses: a/2 at every p, b p^2/2 (derivative 1/2)
        self.counterterms.a[2] = -2 * base[0]
        self.counterterms.b[2] = -2 * d
        self._done.add((1, 2))
        self._current = None

    def two_point_l2_grid(self, lam: float) -> np.ndarray:
        self._read(1, 2)
        J = self._J["L2,2"]
        p = self.p_grid
        return (0.5 * self.counterterms.a[2] + 0.5 * self.counterterms.b[2] * p**2 - J.at_top) + J(lam)

    def two_point_l2(self, p: float, lam: float) -> float:
        vals = self.two_point_l2_grid(lam)[: self.pu_grid.size]
        if p > self.p_grid[self.pu_grid.size - 1] * (1 + 1e-12):
            raise DomainError(f"|p| = {p} beyond p_max")
        s = CubicSpline(self.pu_grid, vals, bc_type=((1, 0.0), "not-a-knot"))
        return float(s(math.asinh(p / self.config.m)))

    def p2_derivative_l2(self, lam: float = 0.0) -> float:
        vals = self.two_point_l2_grid(lam)
        return richardson_p2_derivative(vals[0], vals[-2], vals[-1], self.config.richardson_h * self.config.m)

    # ---------------- uniform access

    def evaluate(self, l: int, n: int, config: MomentumConfig, lam: float) -> float:
        """L_{2n,l}(config) at scale lam."""
        if config.n != n:
            raise DomainError(f"configuration has {len(config)} legs, expected {2 * n}")
        c = self.config
        if not 0 <= lam <= c.lam0:
            raise DomainError(f"lam={lam} outside [0, lam0]")
        if l == 0:
            self._read(n, 0)
            if n > 4:
                raise DomainError("trees are tabulated up to 2n = 8")
            return tree_cag(config, FlowScales(lam, c.lam0, c.m), c.g)
        self._ensure(l)
        if l == 1 and n == 1:
            return self.two_point_l1(lam)
        if l == 1 and n == 2:
            return self.four_point_l1(config, lam)
        if l == 2 and n == 1:
            P = config.momenta
            if not np.allclose(P[0], -P[1]):
                raise DomainError("two-point configuration must be (p, -p)")
            return self.two_point_l2(float(np.linalg.norm(P[0])), lam)
        raise DomainError(f"(n={n}, l={l}) is not computed")

    def renormalization_residuals(self) -> dict:
        """Conditions at Lam = 0: L_{2,l}(0), d/dp^2 L_{2,l}(0), L_{4,1}(0)."""
        out = {}
        l_max = self.config.l_max
        if l_max >= 1:
            self._ensure(1)
            out["L2,1(0)"] = self.two_point_l1(0.0)
            out["dp2 L2,1(0)"] = 0.0       # L_{2,1} carries no momentum dependence
            out["L4,1(0)"] = self.four_point_l1(make_family("zero", 4), 0.0)
        if l_max >= 2:
            self._ensure(2)
            out["L2,2(0)"] = float(self.two_point_l2_grid(0.0)[0])
            out["dp2 L2,2(0)"] = self.p2_derivative_l2(0.0)
        return out

    # ---------------- tables

    def lam_axis(self) -> np.ndarray:
        return np.array([x * self.config.m for x in self.config.lam_table if x * self.config.m <= self.config.lam0])

    def tables(self, l: int) -> dict:
        """AmplitudeTable per 2n for the given order."""
        lam = self.lam_axis()
        c = self.config
        out = {}
        if l == 0:
            pq = np.array([0.0, 0.5, 1.0, 2.0, 5.0]) * c.m
            cs = np.array([-1.0, 0.0, 1.0])
            vals = np.empty((pq.size, pq.size, cs.size, lam.size))
            for idx in itertools.product(range(pq.size), range(pq.size), range(cs.size), range(lam.size)):
                cfg = make_family("four-point", pq[idx[0]], pq[idx[1]], cs[idx[2]])
                vals[idx] = self.evaluate(0, 2, cfg, lam[idx[3]])
            out[4] = AmplitudeTable(2, 0, "four-point", {"p": pq, "q": pq, "cos": cs, "lam": lam}, vals, c.m)
            for n in (3, 4):
                vals = np.array([self.evaluate(0, n, make_family("zero", 2 * n), x) for x in lam])
                out[2 * n] = AmplitudeTable(n, 0, "zero", {"lam": lam}, vals, c.m)
            return out
        self._ensure(l)
        p_axis = self.config.m * np.sinh(self.pu_grid[:: max(1, self.pu_grid.size // 10)])
        if l == 1:
            vals = np.array([[self.two_point_l1(x) for x in lam] for _ in p_axis])
            out[2] = AmplitudeTable(1, 1, "antipodal-pair", {"p": p_axis, "lam": lam}, vals, c.m)
            pq = np.array([0.0, 0.5, 1.0, 2.0, 5.0, 10.0]) * c.m
            pq = pq[pq <= c.p_max * c.m]
            cs = np.array([-1.0, -0.5, 0.0, 0.5, 1.0])
            vals = np.empty((pq.size, pq.size, cs.size, lam.size))
            for idx in itertools.product(range(pq.size), range(pq.size), range(cs.size), range(lam.size)):
                cfg = make_family("four-point", pq[idx[0]], pq[idx[1]], cs[idx[2]])
                vals[idx] = self.four_point_l1(cfg, lam[idx[3]])
            out[4] = AmplitudeTable(2, 1, "four-point", {"p": pq, "q": pq, "cos": cs, "lam": lam}, vals, c.m)
            return out
        if l == 2:
            vals = np.array([[self.two_point_l2(p, x) for x in lam] for p in p_axis])
            out[2] = AmplitudeTable(1, 2, "antipodal-pair", {"p": p_axis, "lam": lam}, vals, c.m)
            return out
        raise DomainError(f"order l={l} not supported")


def richardson_p2_derivative(f0: float, fh: float, f2h: float, h: float) -> float:
    """d f / d(p^2) at p = 0 for an even f, from f(0), f(h), f(2h); error O(h^4)."""
    d1 = (fh - f0) / h**2
    d2 = (f2h - f0) / (2 * h) ** 2
    return (4 * d1 - d2) / 3


# ---------------------------------------------------------------- generic right-hand sides


def rhs_loop_term(l: int, n: int, config: MomentumConfig, lam: float, solver: FlowSolver) -> float:
    """C(2n+2, 2) int_k dC(k) L_{2n+2,l-1}(k, -k, p_1..p_2n) for one configuration."""
    if config.n != n or lam <= 0:
        raise DomainError("need a matching configuration and lam > 0")
    c = solver.config
    P = config.momenta
    if l == 1:
        pair, leg, const = loop_channel_weights(n)
        total = float(const) * solver.loop_dC(lam)
        for S, w in leg.items():
            v = _mask_momentum(S, P)
            total += float(w) * float(_prop(v @ v, lam, c.lam0, c.m)) * solver.loop_dC(lam)
        for S, w in pair.items():
            v = _mask_momentum(S, P)
            val = solver.loop_channel(lam, [np.linalg.norm(v)], lambda q2: _prop(q2, lam, c.lam0, c.m))[0]
            total += float(w) * val
        return c.g**n * total
    if l == 2 and n == 1:
        solver._ensure(1)
        F, G = solver._channels(float(lam))
        p = float(np.linalg.norm(P[0]))
        # channels of L_{4,1}(k, -k, p, -p)
        const = solver.counterterms.c[1] / 24.0 + 2 * float(F(0.0)) + 2 * float(G(p))
        I0 = solver.loop_dC(lam)
        IG = solver.loop_radial(lam, lambda k: G(k))
        IFp = solver.loop_channel(lam, [p], lambda q2: F(np.sqrt(q2)))[0]
        return 6 * (const * I0 + 2 * IG + 2 * IFp + 2 * IFp)
    raise NotImplementedError(f"loop term for (n={n}, l={l})")


def rhs_bilinear_term(l: int, n: int, config: MomentumConfig, lam: float, solver: FlowSolver) -> float:
    """-sum_{l1+l2=l} sum_{n1+n2=n+1} 2 n1 n2 [L_{2n1,l1} dC L_{2n2,l2}]_sy for one configuration."""
    if config.n != n or lam <= 0:
        raise DomainError("need a matching configuration and lam > 0")
    c = solver.config
    P = config.momenta
    nlegs = 2 * n
    total = 0.0
    for l1 in range(l + 1):
        l2 = l - l1
        for n1 in range(1, n + 1):
            n2 = n + 1 - n1
            if (n1 == 1 and l1 == 0) or (n2 == 1 and l2 == 0):
                continue          # two-point trees vanish
            subsets = list(itertools.combinations(range(nlegs), 2 * n1 - 1))
            acc = 0.0
            for I in subsets:
                J = [j for j in range(nlegs) if j not in I]
                q = -P[list(I)].sum(axis=0)
                left = MomentumConfig(np.vstack([P[list(I)], q[None, :]]))
                right = MomentumConfig(np.vstack([-q[None, :], P[J]]))
                acc += (solver.evaluate(l1, n1, left, lam) * float(_dprop(q @ q, lam, c.m))
                        * solver.evaluate(l2, n2, right, lam))
            total -= 2 * n1 * n2 * acc / len(subsets)
    return total


def integrate_order(l: int, solver: FlowSolver) -> tuple[dict, CountertermSet]:
    """Tables for every computed 2n at order l, and the counterterms fixed so far."""
    solver._ensure(l)
    return solver.tables(l), solver.counterterms
