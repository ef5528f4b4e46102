"""Lower-bound constraints on the Borel constant K and their minimal fixpoint.

Every constraint is stored as a :class:`InequalityRecord` whose ``ratio``
returns the left-hand side of the constraint normalized to the form
``ratio <= 1``, and whose ``implied`` returns the smallest K that the
constraint allows when the K-dependent correction terms are frozen at the
current K.  :func:`minimal_K` iterates ``K <- max implied(K)`` to the fixpoint.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

from .constants import DEFAULT, ConstantRegistry
from .model import MultiIndex

SQRT_E = math.sqrt(math.e)


class ChainError(RuntimeError):
    """Fixpoint or parameter sweep did not produce a trustworthy answer."""


class CapBoundaryError(ChainError):
    """The supremum over (n, l) sits on the sweep boundary."""


def multinomial_decompositions(w: MultiIndex):
    """Yield (w1, w2, w3, c) over all w1 + w2 + w3 = w with c = w!/(w1! w2! w3!)."""
    per_axis = []
    for k in w.w:
        options = []
        for a in range(k + 1):
            for b in range(k - a + 1):
                c = k - a - b
                options.append((a, b, c, math.factorial(k) // (math.factorial(a) * math.factorial(b) * math.factorial(c))))
        per_axis.append(options)
    for combo in itertools.product(*per_axis):
        w1 = tuple(o[0] for o in combo)
        w2 = tuple(o[1] for o in combo)
        w3 = tuple(o[2] for o in combo)
        yield w1, w2, w3, math.prod(o[3] for o in combo)


def ktilde_multiplicities(w: MultiIndex | int) -> tuple[int, ...]:
    """Multinomial weight grouped by |w3|; (8, 12, 6, 1) for |w| = 3."""
    if isinstance(w, int):
        w = MultiIndex.axis(w)
    return _multiplicities(w.w)


@lru_cache(maxsize=None)
def _multiplicities(w: tuple[int, ...]) -> tuple[int, ...]:
    grouped = [0] * (sum(w) + 1)
    for _, _, w3, c in multinomial_decompositions(MultiIndex(w)):
        grouped[sum(w3)] += c
    return tuple(grouped)


def ktilde(w: MultiIndex | int, primed: bool = False, registry: ConstantRegistry = DEFAULT) -> float:
    """Sum over decompositions of c_{w_i} K^{(|w3|)} (primed: half-width constants)."""
    consts = registry.k_w_half if primed else registry.k_w
    return math.fsum(g * consts[k] for k, g in enumerate(ktilde_multiplicities(w)))


# Replacement factors for K0*Kt (n > 2) and K0''*Kt (n <= 2) that account for
# the interpolated relevant terms on the right-hand side of the flow equation.

def _case_i(R: ConstantRegistry, kt: float, ktp: float, K: float) -> float:
    return (R.K0 / 2 * kt + 2 * R.K0_prime * kt + 2 * R.K0_prime * 2 / (SQRT_E * K**0.25) * ktp
            + 2 * R.K0_second * kt
            + R.K0_second * (1 / SQRT_E + 0.5 * 2 / math.e + K**-0.25) * ktp)


def _case_ii(R: ConstantRegistry, kt: float, ktp: float, K: float) -> float:
    return (R.K0 / 2 * kt + R.K0_prime * kt
            + R.K0_prime * (2 / (SQRT_E * K**0.25) + 2 / (math.e * K**0.5)) * ktp
            + 2 * R.K0_second * kt
            + 2 * R.K0_second * (1 / SQRT_E + 0.5 * 2 / math.e + K**-0.25) * ktp)


def _case_iii(R: ConstantRegistry, kt: float, ktp: float, K: float) -> float:
    return 2 * R.K0_second * kt + 2 * R.K0_second * 1 / (SQRT_E * K**0.25) * 2 * ktp


def _case_iv(R: ConstantRegistry, kt: float, ktp: float, K: float) -> float:
    return R.K0_second * kt + R.K0_second * (1 / SQRT_E + 0.5 * 2 / math.e + K**-0.25) * ktp


def replacement_factor(n: int, w: int, K: float, R: ConstantRegistry = DEFAULT) -> float:
    """The decomposition factor that replaces K0*Kt (n > 2) or K0''*Kt (n <= 2)."""
    kt, ktp = ktilde(w, False, R), ktilde(w, True, R)
    if n > 3:
        return _case_i(R, kt, ktp, K)
    if n == 3:
        return _case_ii(R, kt, ktp, K)
    if n == 2:
        return _case_iii(R, kt, ktp, K)
    return _case_iv(R, kt, ktp, K)


def _lsq(l: int) -> float:
    return (l + 1) ** 2 / l**2


C62 = 15  # binomial(6, 2)


# Each form maps (n, l, w, K, R) to (A, p, c) meaning the constraint reads
#     A(K) <= K^p * (1 - c K^{-1/4})
# which is how every display can be rearranged.  ratio = A / (K^p (1 - c K^-1/4)).

Form = Callable[[int, int, int, float, ConstantRegistry], tuple[float, float, float]]


def _bdk0(n, l, w, K, R):
    return ((n / (n + 1)) ** 3 * (2 * n + 1) * _lsq(l) * R.K2 * R.K3 * R.c[w] * 5 / (2 * n + w - 4), 1.0, 0.0)


def _bdk1(n, l, w, K, R):
    return ((2 / 3) ** 3 * 5 * _lsq(l) * R.K2 * R.K3 * R.c[w] * 5 / w, 0.75, 0.0)


def _bdk2(n, l, w, K, R):
    return (3 / 8 * _lsq(l) * R.K2 * R.K3 * R.c[3] * 5, 1.0, 0.0)


def _bdk3(n, l, w, K, R):
    return (3 * 2 * R.K2 * n / (2 * n + w - 4) * replacement_factor(n, w, K, R), 1.0, 0.0)


def _bdk34(n, l, w, K, R):
    return (6 * R.K2 * 2 * replacement_factor(2, w, K, R), 0.75, 0.0)


def _bdk32(n, l, w, K, R):
    return (6 * R.K2 * replacement_factor(1, w, K, R), 0.75, 0.0)


def _bdk4(n, l, w, K, R):
    first = 5 * R.K3 * (n / (n + 1)) ** 3 * R.c[w] * (2 * n + 1) * _lsq(l) / (2 * n + w - 4)
    second = 6 * n / (2 * n + w - 4) * replacement_factor(n, w, K, R)
    return (R.K2 * (first + second), 1.0, 0.0)


def _bdk5(n, l, w, K, R):
    first = 5 * 5 * (2 / 3) ** 3 * R.K3 * R.c[w] * _lsq(l) / w
    second = 6 * 2 * 2 / w * replacement_factor(2, w, K, R)
    return (R.K2 * (first + second), 0.75, 0.0)


def _bdk6(n, l, w, K, R):
    first = 5 * 3 / 8 * R.K3 * R.c[3] * _lsq(l) * K**-0.25
    second = 6 * replacement_factor(1, w, K, R)
    return (R.K2 * (first + second), 0.75, 0.0)


def _bdke(n, l, w, K, R):
    kt, ktp = ktilde(w, False, R), ktilde(w, True, R)
    bracket = _case_ii(R, kt, ktp, K)
    return ((5 * R.K3 * (3 / 4) ** 3 * R.c[w] * 7 * _lsq(l) + 18 * bracket) * R.K2 / (2 + w), 1.0, 0.0)


def _bdk8_core(R, l, six):
    return six * R.K2 * R.K3 * C62 * 2**4 / (2 * 3**4) * _lsq(l)


def _bdk8(n, l, w, K, R):
    return (_bdk8_core(R, l, 6), 1.0, 0.0)


def _bdk9(n, l, w, K, R):
    return (16 * R.K0_second * R.K1, 1.0, 0.0)


def _bdk10(n, l, w, K, R):
    return (_bdk8_core(R, l, 6) + 16 * R.K0_second * R.K1, 1.0, 6.0)


def _bdk11(n, l, w, K, R):
    return (_bdk8_core(R, l, 2) + 16 * R.K0_second * R.K1, 1.0, 4.0)


def _bdk12(n, l, w, K, R):
    return (_bdk8_core(R, l, 2) + 16 * R.K0_second * R.K1, 1.0, 5.0)


def _bdk13(n, l, w, K, R):
    return (R.K2 * R.K3 * 6 * 6 * _lsq(l), 1.25, 0.0)


def _bdk15(n, l, w, K, R):
    A = R.K2 * R.K3 * 36 * _lsq(l) * K**-0.25 + 8 * (2 * R.K0_second * R.K1_prime + R.K0_second * R.K1)
    return (A, 1.0, 0.0)


def _bdk16(n, l, w, K, R):
    A = R.K2 * R.K3 * 12 * _lsq(l) * K**-0.25 + 8 * (2 * R.K0_second * R.K1_prime + R.K0_second * R.K1)
    return (A, 1.0, 2.0)


def _bdk17(n, l, w, K, R):
    return (4 * R.K0_second * R.K1, 1.0, 0.0)


def _bdk18(n, l, w, K, R):
    A = (R.K2 * R.K3 * 6 * _lsq(l) * K**-0.25
         + 0.5 * 9 / 2**4 * _lsq(l) * R.K2 * R.K3 + 6 * R.K0_second * R.K1 + 8 * R.K0_second * R.K1_prime)
    return (A, 1.0, 1.0)


def _kal(n, l, w, K, R):
    return (9 / 2**4 * _lsq(l) * R.K2 * R.K3, 1.0, 0.0)


@dataclass(frozen=True)
class InequalityRecord:
    """One lower-bound constraint on K with its parameter domain."""

    id: str
    form: Form = field(repr=False)
    n_values: Callable[[int], Iterable[int]] = field(repr=False)
    l_min: int
    w_orders: tuple[int, ...]
    display: str = ""

    def domain(self, n_cap: int, l_cap: int):
        for n in self.n_values(n_cap):
            for w in self.w_orders:
                for l in range(self.l_min, l_cap + 1):
                    yield n, l, w

    def contains(self, n: int, l: int, w: int) -> bool:
        return n in self.n_values(max(n, 1)) and w in self.w_orders and l >= self.l_min

    def ratio(self, n: int, l: int, w: int, K: float, registry: ConstantRegistry = DEFAULT) -> float:
        A, p, c = self.form(n, l, w, K, registry)
        denom = K**p * (1.0 - c * K**-0.25)
        return math.inf if denom <= 0 else A / denom

    def implied(self, n: int, l: int, w: int, K: float, registry: ConstantRegistry = DEFAULT) -> float:
        """Smallest K compatible with the constraint, correction terms frozen at K."""
        A, p, c = self.form(n, l, w, K, registry)
        slack = 1.0 - c * K**-0.25
        if slack <= 0:
            return math.inf
        return (A / slack) ** (1.0 / p)


def _from(lo: int, hi: int | None = None):
    return lambda cap: range(lo, (hi if hi is not None else cap) + 1)


RECORDS: tuple[InequalityRecord, ...] = (
    InequalityRecord("bdk0", _bdk0, _from(3), 1, (0, 1, 2, 3), "K^-1 (n/(n+1))^3 (2n+1) (l+1)^2/l^2 K2 K3 c(|w|) 5/(2n+|w|-4) <= 1"),
    InequalityRecord("bdk1", _bdk1, _from(2, 2), 1, (1, 2, 3), "K^-3/4 (2/3)^3 5 (l+1)^2/l^2 K2 K3 c(|w|) 5/|w| <= 1"),
    InequalityRecord("bdk2", _bdk2, _from(1, 1), 2, (3,), "K^-1 3/8 (l+1)^2/l^2 K2 K3 c(3) 5 <= 1"),
    InequalityRecord("bdk3", _bdk3, _from(3), 1, (0, 1, 2, 3), "K^-1 3*2 K2 n/(2n+|w|-4) [K0 Kt]_case <= 1"),
    InequalityRecord("bdk34", _bdk34, _from(2, 2), 1, (1, 2, 3), "K^-3/4 6 K2 2 [K0'' Kt]_iii <= 1"),
    InequalityRecord("bdk32", _bdk32, _from(1, 1), 2, (3,), "K^-3/4 6 K2 [K0'' Kt]_iv <= 1"),
    InequalityRecord("bdk4", _bdk4, _from(3), 1, (0, 1, 2, 3), "K2 (5 K3 (n/(n+1))^3 c (2n+1)(l+1)^2/((2n+|w|-4) l^2) + 6n/(2n+|w|-4) [K0 Kt]_case) <= K"),
    InequalityRecord("bdk5", _bdk5, _from(2, 2), 1, (1, 2, 3), "K2 (25 (2/3)^3 K3 c (l+1)^2/(|w| l^2) + 12 (2/|w|) [K0'' Kt]_iii) <= K^3/4"),
    InequalityRecord("bdk6", _bdk6, _from(1, 1), 2, (3,), "K2 (5 (3/8) K3 c(3) (l+1)^2/l^2 K^-1/4 + 6 [K0'' Kt]_iv) <= K^3/4"),
    InequalityRecord("bdke", _bdke, _from(3, 3), 1, (0, 1, 2, 3), "{5 K3 (3/4)^3 c 7 (l+1)^2/l^2 + 18 [K0 Kt]_ii} K2/(2+|w|) <= K"),
    InequalityRecord("bdk8", _bdk8, _from(2, 2), 1, (0,), "K^-1 6 K2 K3 C(6,2) 2^4/(2*3^4) (l+1)^2/l^2 <= 1"),
    InequalityRecord("bdk9", _bdk9, _from(2, 2), 1, (0,), "16 K0'' K1 <= K"),
    InequalityRecord("bdk10", _bdk10, _from(2, 2), 1, (0,), "K^-1 (6 K2 K3 C(6,2) 2^4/(2*3^4) (l+1)^2/l^2 + 16 K0'' K1) + 6 K^-1/4 <= 1"),
    InequalityRecord("bdk11", _bdk11, _from(2, 2), 1, (0,), "K^-1 (2 K2 K3 C(6,2) 2^4/(2*3^4) (l+1)^2/l^2 + 16 K0'' K1) + 4 K^-1/4 <= 1"),
    InequalityRecord("bdk12", _bdk12, _from(2, 2), 1, (0,), "K^-1 (2 K2 K3 C(6,2) 2^4/(2*3^4) (l+1)^2/l^2 + 16 K0'' K1) + 5 K^-1/4 <= 1"),
    InequalityRecord("bdk13", _bdk13, _from(1, 1), 2, (2,), "K^-5/4 K2 K3 6*6 (l+1)^2/l^2 <= 1"),
    InequalityRecord("bdk15", _bdk15, _from(1, 1), 2, (2,), "K^-5/4 K2 K3 36 (l+1)^2/l^2 + 8 K^-1 (2 K0'' K1' + K0'' K1) <= 1"),
    InequalityRecord("bdk16", _bdk16, _from(1, 1), 2, (1, 2), "2 K^-1/4 + K^-5/4 K2 K3 12 (l+1)^2/l^2 + 8 K^-1 (2 K0'' K1' + K0'' K1) <= 1"),
    InequalityRecord("bdk17", _bdk17, _from(1, 1), 2, (0,), "4 K0'' K1 <= K"),
    InequalityRecord("bdk18", _bdk18, _from(1, 1), 2, (0,), "K^-1/4 + K^-5/4 K2 K3 6 (l+1)^2/l^2 + K^-1 (1/2 9/2^4 (l+1)^2/l^2 K2 K3 + 6 K0'' K1 + 8 K0'' K1') <= 1"),
    InequalityRecord("kal", _kal, _from(1, 1), 2, (0,), "9/2^4 (l+1)^2/l^2 K2 K3 <= K"),
)

RECORD_IDS = tuple(r.id for r in RECORDS)


def get_record(record_id: str, records: Sequence[InequalityRecord] = RECORDS) -> InequalityRecord:
    for r in records:
        if r.id == record_id:
            return r
    raise KeyError(f"unknown record {record_id!r}")


def evaluate_constraint(record: InequalityRecord | str, n: int, l: int, w: int, K: float,
                        registry: ConstantRegistry = DEFAULT) -> float:
    """Left-hand side of the record in ``<= 1`` form; values <= 1 mean satisfied."""
    if isinstance(record, str):
        record = get_record(record)
    if K <= 0:
        raise ValueError("K must be positive")
    if not record.contains(n, l, w):
        raise ValueError(f"{record.id}: parameters n={n}, l={l}, |w|={w} outside the record's range")
    return record.ratio(n, l, w, K, registry)


@dataclass(frozen=True)
class RecordBound:
    id: str
    n: int
    l: int
    w: int
    implied_K: float
    ratio_at_K: float
    at_cap: bool = False


def _tail_envelope(record: InequalityRecord, K: float, n_cap: int, l_cap: int, registry: ConstantRegistry) -> float:
    """Implied bound far beyond the n cap, used to decide if truncation matters."""
    far = 1000 * n_cap
    return max(record.implied(far, l, w, K, registry)
               for w in record.w_orders for l in range(record.l_min, min(l_cap, record.l_min + 2) + 1))


def supremum_over_parameters(record: InequalityRecord, K: float, n_cap: int = 50, l_cap: int = 50,
                             registry: ConstantRegistry = DEFAULT, guard: bool = True) -> RecordBound:
    """Arg-sup of the implied bound over the record's (n, l, |w|) range.

    With ``guard`` set, raises :class:`CapBoundaryError` when the supremum sits
    at n_cap or l_cap.  Otherwise the result carries ``at_cap=True``.
    """
    if n_cap < 3 or l_cap < 3:
        raise ValueError("parameter caps must be at least 3")
    best = None
    for n, l, w in record.domain(n_cap, l_cap):
        v = record.implied(n, l, w, K, registry)
        if best is None or v > best[0]:
            best = (v, n, l, w)
    if best is None:
        raise ValueError(f"{record.id}: empty parameter range under the caps")
    v, n, l, w = best
    n_free = len(record.n_values(n_cap)) > 1
    at_cap = (n_free and n == n_cap) or (l == l_cap)
    if at_cap and guard:
        raise CapBoundaryError(f"{record.id}: supremum attained at the cap (n={n}, l={l}); widen the caps")
    return RecordBound(record.id, n, l, w, v, record.ratio(n, l, w, K, registry), at_cap)


@dataclass
class ChainResult:
    K: float
    binding: RecordBound
    table: list[RecordBound]
    iterations: int


def _sweep(records, K, n_cap, l_cap, registry) -> list[RecordBound]:
    table = [supremum_over_parameters(r, K, n_cap, l_cap, registry, guard=False) for r in records]
    top = max(b.implied_K for b in table)
    for r, b in zip(records, table):
        # a record that grows up to the cap only matters if its tail could bind
        if b.at_cap and _tail_envelope(r, K, n_cap, l_cap, registry) >= top:
            raise CapBoundaryError(
                f"{r.id}: supremum attained at the cap (n={b.n}, l={b.l}) and may bind; widen the caps")
    return table


def minimal_K(records: Sequence[InequalityRecord] = RECORDS, registry: ConstantRegistry = DEFAULT,
              n_cap: int = 50, l_cap: int = 50, K_start: float = 1e9, rtol: float = 1e-10,
              max_iter: int = 10_000) -> ChainResult:
    """Fixpoint K <- max over records of the implied lower bound at K."""
    if not records:
        raise ValueError("no records to evaluate")
    K = K_start
    for it in range(1, max_iter + 1):
        K_new = max(b.implied_K for b in _sweep(records, K, n_cap, l_cap, registry))
        if not math.isfinite(K_new):
            K_new = 10 * K
        if abs(K_new - K) <= rtol * K_new:
            K = K_new
            break
        K = K_new
    else:
        raise ChainError(f"fixpoint did not converge in {max_iter} iterations (last K={K:.6g})")
    table = _sweep(records, K, n_cap, l_cap, registry)
    binding = max(table, key=lambda b: b.implied_K)
    return ChainResult(K, binding, table, it)
