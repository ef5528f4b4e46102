"""Kinematics, flow scales, the regularized propagator and the eta subsum."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class DomainError(ValueError):
    """Raised when an operation is evaluated outside its domain."""


@dataclass(frozen=True)
class FlowScales:
    """Flow scale ``lam``, UV cutoff ``lam0`` and mass ``m``; ``kappa = lam + m``."""

    lam: float
    lam0: float
    m: float = 1.0

    def __post_init__(self):
        if not self.m > 0:
            raise DomainError(f"mass must be positive, got {self.m}")
        if not 0 <= self.lam <= self.lam0:
            raise DomainError(f"need 0 <= lam <= lam0, got lam={self.lam}, lam0={self.lam0}")

    @property
    def kappa(self) -> float:
        return self.lam + self.m

    def at(self, lam: float) -> "FlowScales":
        return FlowScales(lam, self.lam0, self.m)


def _decay(z, lam):
    """exp(-z/lam^2), with exp(-z/0) := 0 for z > 0."""
    z = np.asarray(z, dtype=float)
    # lam^2 may underflow for tiny lam; the limit is the same as lam = 0
    out = np.where(z > 0, 0.0, 1.0) if lam * lam == 0 else np.exp(-z / lam**2)
    return out if out.ndim else float(out)


def propagator(p_sq, scales: FlowScales):
    """Regularized propagator C^{lam,lam0}(p) as a function of p^2."""
    z = np.asarray(p_sq, dtype=float) + scales.m**2
    out = (_decay(z, scales.lam0) - _decay(z, scales.lam)) / z
    return out if np.ndim(out) else float(out)


def propagator_lambda_derivative(p_sq, scales: FlowScales):
    """d/dlam of the propagator: -(2/lam^3) exp(-(p^2+m^2)/lam^2)."""
    lam = scales.lam
    if lam <= 0:
        raise DomainError("the lam-derivative of the propagator is evaluated at lam > 0 only")
    z = np.asarray(p_sq, dtype=float) + scales.m**2
    if lam * lam == 0:
        out = np.zeros_like(z)
    else:
        out = -2.0 * np.exp(-z / lam**2 - 3 * math.log(lam))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class MultiIndex:
    """Derivative multi-index w = (w^0, ..., w^3) acting on a single momentum."""

    w: tuple[int, int, int, int]

    def __post_init__(self):
        if len(self.w) != 4 or any(int(x) != x or x < 0 for x in self.w):
            raise DomainError(f"multi-index needs 4 non-negative integers, got {self.w}")
        if sum(self.w) > 3:
            raise DomainError(f"|w| = {sum(self.w)} > 3 is not supported")

    @classmethod
    def axis(cls, order: int, mu: int = 0) -> "MultiIndex":
        w = [0, 0, 0, 0]
        w[mu] = order
        return cls(tuple(w))

    @property
    def order(self) -> int:
        return sum(self.w)

    def axes(self) -> list[int]:
        """The derivative directions with repetition, e.g. (2,1,0,0) -> [0, 0, 1]."""
        return [mu for mu, k in enumerate(self.w) for _ in range(k)]


def regulator_momentum_derivative(p: Sequence[float], scales: FlowScales, w: MultiIndex,
                                  half_width: bool = False) -> float:
    """d^w/dp^w of exp(-(p^2+m^2)/(c lam^2)), c = 2 for the half-width variant.

    Uses the closed polynomial-times-Gaussian forms for |w| <= 3.
    """
    if scales.lam <= 0:
        raise DomainError("regulator derivatives need lam > 0")
    p = np.asarray(p, dtype=float)
    a = 1.0 / ((2.0 if half_width else 1.0) * scales.lam**2)
    g = math.exp(-a * (float(p @ p) + scales.m**2))
    ax = w.axes()
    d = lambda i, j: 1.0 if ax[i] == ax[j] else 0.0
    if len(ax) == 0:
        return g
    if len(ax) == 1:
        return -2.0 * a * p[ax[0]] * g
    if len(ax) == 2:
        return (4 * a * a * p[ax[0]] * p[ax[1]] - 2 * a * d(0, 1)) * g
    q0, q1, q2 = (p[mu] for mu in ax)
    return (-8 * a**3 * q0 * q1 * q2
            + 4 * a * a * (d(0, 1) * q2 + d(0, 2) * q1 + d(1, 2) * q0)) * g


@dataclass(frozen=True)
class MomentumConfig:
    """An ordered list of 2n Euclidean four-momenta summing to zero."""

    momenta: np.ndarray

    def __init__(self, momenta):
        arr = np.array(momenta, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 4:
            raise DomainError(f"momenta must have shape (2n, 4), got {arr.shape}")
        if arr.shape[0] < 2 or arr.shape[0] % 2:
            raise DomainError(f"need an even number >= 2 of momenta, got {arr.shape[0]}")
        scale = max(1.0, float(np.max(np.linalg.norm(arr, axis=1))))
        if np.max(np.abs(arr.sum(axis=0))) > 1e-12 * scale:
            raise DomainError("momenta do not sum to zero")
        arr.setflags(write=False)
        object.__setattr__(self, "momenta", arr)

    @property
    def n(self) -> int:
        return self.momenta.shape[0] // 2

    def __len__(self) -> int:
        return self.momenta.shape[0]

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.momenta, axis=1)


def sup_momentum(config: MomentumConfig) -> float:
    """|p| = max_i |p_i|."""
    return float(config.norms().max())


def eta(config: MomentumConfig, i: int, j: int) -> float:
    """Smallest |p_i + sum_{k in J} p_k| over subsets J of the legs other than i, j.

    Legs are numbered from 1 as in the CAG argument list.
    """
    size = len(config)
    if i == j:
        raise DomainError("eta needs two distinct legs")
    if not (1 <= i <= size and 1 <= j <= size):
        raise DomainError(f"leg indices must lie in 1..{size}")
    p = config.momenta
    others = [k for k in range(size) if k not in (i - 1, j - 1)]
    best = math.inf
    for r in range(len(others) + 1):
        for subset in itertools.combinations(others, r):
            best = min(best, float(np.linalg.norm(p[i - 1] + p[list(subset)].sum(axis=0))))
    return best


FAMILIES = ("zero", "antipodal-pair", "four-point")


def make_family(name: str, *params: float) -> MomentumConfig:
    """Construct a configuration from a named kinematic family.

    ``zero(2n)``, ``antipodal-pair(|p|)`` and ``four-point(|p|, |q|, cos)`` for
    (p, -p, q, -q) with p along axis 0 and q in the (0, 1) plane.
    """
    if name == "zero":
        (two_n,) = params
        return MomentumConfig(np.zeros((int(two_n), 4)))
    if name == "antipodal-pair":
        (pn,) = params
        p = np.array([pn, 0.0, 0.0, 0.0])
        return MomentumConfig([p, -p])
    if name == "four-point":
        pn, qn, cos = params
        if not -1 <= cos <= 1:
            raise DomainError(f"cosine {cos} outside [-1, 1]")
        p = np.array([pn, 0.0, 0.0, 0.0])
        q = qn * np.array([cos, math.sqrt(max(0.0, 1 - cos * cos)), 0.0, 0.0])
        return MomentumConfig([p, -p, q, -q])
    raise DomainError(f"unknown family {name!r}; expected one of {FAMILIES}")
