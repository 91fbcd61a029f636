"""Transient law of the subordinated (discrete-time) chain.

The chain lives on {0, 1, 2, ...}, starts at 0 and from state ``i`` moves to
``i + 1`` with probability ``1/(1+i)``, otherwise stays put. Its n-step law
``p[n][k] = P(X_n = k)`` is computed here in three ways:

* ``dist_recurrence`` runs the forward recurrence in exact rational
  arithmetic. Every coefficient is nonnegative, so nothing cancels; this is
  the reference every other route is checked against.
* ``pnk_closed_exact`` evaluates the alternating closed form
  ``(1/k!) sum_i (-1)^(k-i) C(k+1, i+1) i^k (i/(i+1))^(n-k)`` exactly.
* ``pnk_closed_float`` evaluates the same sum in doubles and reports how many
  digits the alternating signs destroyed.

``dist_float`` runs the recurrence in doubles for horizons beyond the exact
limit.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, NamedTuple

import gmpy2
import numpy as np

from .config import DOUBLE_DIGITS, check_exact_limit
from .errors import DomainError, PrecisionExhausted

__all__ = [
    "ExactDist",
    "CoeffAik",
    "ClosedFloat",
    "transition_probs",
    "dist_recurrence",
    "iter_rows",
    "dist_float",
    "pnk_closed_exact",
    "pnk_closed_float",
    "cancellation_digits",
    "aik_product",
    "aik_closed",
    "coeff_Aik",
]


def _check_step(n: int, name: str = "n") -> None:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise DomainError(f"{name} must be an integer, got {n!r}")
    if n < 0:
        raise DomainError(f"{name} must be nonnegative, got {n}")


def transition_probs(i: int) -> tuple[Fraction, Fraction]:
    """Return ``(p_up, p_stay)`` for the chain sitting in state ``i``.

    >>> transition_probs(3)
    (Fraction(1, 4), Fraction(3, 4))
    """
    _check_step(i, "i")
    return Fraction(1, 1 + i), Fraction(i, 1 + i)


def _mpq_to_fraction(q) -> Fraction:
    # gmpy2 has already reduced q; Fraction(p, q) would redo a gcd that costs
    # seconds on the million-bit denominators of late rows
    f = object.__new__(Fraction)
    f._numerator = int(q.numerator)
    f._denominator = int(q.denominator)
    return f


@dataclass(frozen=True, eq=False)
class ExactDist:
    """Exact law of ``X_n`` stored as integer numerators over one denominator.

    ``numerators[k] / denominator == P(X_n = k)`` for ``0 <= k <= n``. The
    shared denominator keeps sums, moments and tails in integer arithmetic;
    individual probabilities are reduced to ``Fraction`` only on access.
    """

    n: int
    denominator: int
    numerators: tuple

    def __getitem__(self, k: int) -> Fraction:
        if k < 0 or k > self.n:
            return Fraction(0)
        num = self.numerators[k]
        if num == 0:
            return Fraction(0)
        return self._reduced(num)

    def _reduced(self, num) -> Fraction:
        return _mpq_to_fraction(gmpy2.mpq(num, self.denominator))

    def __len__(self) -> int:
        return len(self.support)

    def __eq__(self, other):
        if not isinstance(other, ExactDist):
            return NotImplemented
        return self.n == other.n and all(
            a * other.denominator == b * self.denominator
            for a, b in zip(self.numerators, other.numerators)
        )

    @property
    def support(self) -> list[int]:
        return [k for k, num in enumerate(self.numerators) if num != 0]

    @property
    def probs(self) -> dict[int, Fraction]:
        """Sparse mapping ``k -> P(X_n = k)``; absent keys are exact zeros."""
        return {k: self[k] for k in self.support}

    def total(self) -> Fraction:
        s = sum(self.numerators)
        return self._reduced(s)

    def raw_moment(self, r: int) -> Fraction:
        s = sum(num * k**r for k, num in enumerate(self.numerators) if num)
        return self._reduced(s)

    def mean(self) -> Fraction:
        return self.raw_moment(1)

    def variance(self) -> Fraction:
        s1 = sum(num * k for k, num in enumerate(self.numerators) if num)
        s2 = sum(num * k * k for k, num in enumerate(self.numerators) if num)
        return _mpq_to_fraction(gmpy2.mpq(s2 * self.denominator - s1 * s1, self.denominator * self.denominator))

    def prob_at_least(self, threshold) -> Fraction:
        """``P(X_n >= threshold)`` for a rational ``threshold``."""
        lo = max(0, math.ceil(Fraction(threshold)))
        s = sum(self.numerators[lo:])
        return self._reduced(s)

    def prob_at_most(self, threshold) -> Fraction:
        """``P(X_n <= threshold)`` for a rational ``threshold``."""
        hi = math.floor(Fraction(threshold))
        if hi < 0:
            return Fraction(0)
        s = sum(self.numerators[: hi + 1])
        return self._reduced(s)

    def expect(self, f) -> Fraction:
        """Exact expectation of ``f(X_n)`` for a rational-valued ``f``."""
        total = gmpy2.mpq(0)
        for k, num in enumerate(self.numerators):
            if num:
                v = Fraction(f(k))
                total += gmpy2.mpq(v.numerator, v.denominator) * num
        return _mpq_to_fraction(total / self.denominator)

    def to_float(self) -> np.ndarray:
        """Correctly rounded doubles, indexed by state."""
        den = int(self.denominator)
        return np.array([int(num) / den for num in self.numerators], dtype=float)


class _RowFrontier:
    """Most recently computed exact row, advanced on demand.

    Rows near the exact limit carry numerators of ~10^5 bits, so only the
    frontier is kept; asking for an earlier row restarts from n = 0.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._reset()

    def _reset(self):
        self.n = 0
        self.denominator = gmpy2.mpz(1)
        self.numerators = [gmpy2.mpz(1)]

    def _step(self):
        n = self.n
        # transitions out of states 0..n have denominators 1..n+1
        lcm = gmpy2.mpz(math.lcm(*range(1, n + 2)))
        old = self.numerators
        new = [gmpy2.mpz(0)] * (n + 2)
        for k in range(1, n + 2):
            acc = (lcm // k) * old[k - 1]
            if k <= n:
                acc += (lcm // (k + 1)) * k * old[k]
            new[k] = acc
        self.numerators = new
        self.denominator *= lcm
        self.n = n + 1

    def get(self, n: int) -> tuple[int, tuple]:
        with self._lock:
            if n < self.n:
                self._reset()
            while self.n < n:
                self._step()
            return self.denominator, tuple(self.numerators)


_frontier = _RowFrontier()


def iter_rows(n_max: int) -> Iterator[ExactDist]:
    """Yield ``dist_recurrence(0), ..., dist_recurrence(n_max)`` in one sweep."""
    _check_step(n_max, "n_max")
    check_exact_limit(n_max)
    row = _RowFrontier()
    yield ExactDist(0, int(row.denominator), tuple(row.numerators))
    for _ in range(n_max):
        row._step()
        yield ExactDist(row.n, row.denominator, tuple(row.numerators))


@lru_cache(maxsize=16)
def _cached_row(n: int) -> ExactDist:
    den, nums = _frontier.get(n)
    return ExactDist(n, den, nums)


def dist_recurrence(n: int) -> ExactDist:
    """Exact law of ``X_n`` from the forward recurrence.

    Raises :class:`ResourceLimitError` past the configured exact limit.
    """
    _check_step(n)
    check_exact_limit(n)
    return _cached_row(int(n))


def dist_float(n: int) -> np.ndarray:
    """Law of ``X_n`` by the recurrence in double precision.

    Every update is a sum of nonnegative terms, so each entry carries a
    relative error of order ``n`` ulps while it stays in the normal range.
    Entries that end below the smallest normal double are returned as 0:
    subnormal arithmetic can stall there (``(2/3) * 5e-324`` rounds back to
    ``5e-324``) and leave values that are off by many orders of magnitude.
    """
    _check_step(n)
    p = np.zeros(n + 1)
    p[0] = 1.0
    for m in range(n):
        # states 0..m are occupied at step m; targets are 1..m+1
        k = np.arange(1, m + 2, dtype=float)
        new = p[: m + 1] / k
        new[:-1] += (k[:-1] / (k[:-1] + 1.0)) * p[1 : m + 1]
        p[1 : m + 2] = new
        p[0] = 0.0
    p[p < np.finfo(float).tiny] = 0.0
    return p


def _check_nk(n: int, k: int) -> None:
    _check_step(n)
    _check_step(k, "k")
    if k == 0 or k > n:
        raise DomainError(f"closed form needs n >= k >= 1, got n={n}, k={k}")


def _closed_terms(n: int, k: int) -> list[Fraction]:
    m = n - k
    fk = math.factorial(k)
    return [
        Fraction((-1) ** (k - i) * math.comb(k + 1, i + 1) * i**k * i**m, fk * (i + 1) ** m)
        for i in range(1, k + 1)
    ]


def pnk_closed_exact(n: int, k: int) -> Fraction:
    """Alternating closed form for ``P(X_n = k)``, summed exactly."""
    _check_nk(n, k)
    return sum(_closed_terms(n, k), Fraction(0))


class ClosedFloat(NamedTuple):
    value: float
    cancellation_digits: float


def _float_terms(n: int, k: int) -> list[float]:
    # each term is a correctly rounded double, so the only loss is the sum
    m = n - k
    fk = math.factorial(k)
    out = []
    for i in range(1, k + 1):
        num = math.comb(k + 1, i + 1) * i ** (k + m)
        den = fk * (i + 1) ** m
        mag = num / den
        out.append(mag if (k - i) % 2 == 0 else -mag)
    return out


def cancellation_digits(terms, result: float) -> float:
    """``log10(max|term| / |result|)``; infinite when the result vanished."""
    biggest = max((abs(t) for t in terms), default=0.0)
    if biggest == 0.0:
        return 0.0
    if result == 0.0 or not math.isfinite(result):
        return math.inf
    return max(0.0, math.log10(biggest) - math.log10(abs(result)))


def pnk_closed_float(
    n: int,
    k: int,
    precision_digits: float = DOUBLE_DIGITS,
    safety_margin: float = 3.0,
) -> ClosedFloat:
    """Evaluate the alternating closed form in doubles.

    Terms are summed with ``math.fsum``. If more than
    ``precision_digits - safety_margin`` digits cancel (or a term overflows)
    :class:`PrecisionExhausted` is raised instead of returning a value; the
    exception carries the measured ``cancellation_digits``.
    """
    _check_nk(n, k)
    try:
        terms = _float_terms(n, k)
    except OverflowError:
        raise PrecisionExhausted(
            f"closed-form terms for n={n}, k={k} overflow double range", math.inf
        ) from None
    value = math.fsum(terms)
    digits = cancellation_digits(terms, value)
    budget = precision_digits - safety_margin
    if digits > budget or value <= 0.0:
        raise PrecisionExhausted(
            f"precision exhausted for n={n}, k={k}: {digits:.2f} digits cancelled, "
            f"budget {budget:.2f}",
            digits,
        )
    return ClosedFloat(value, digits)


@dataclass(frozen=True)
class CoeffAik:
    i: int
    k: int
    value: int


def _check_ik(i: int, k: int) -> None:
    _check_step(i, "i")
    _check_step(k, "k")
    if not 1 <= i <= k:
        raise DomainError(f"need 1 <= i <= k, got i={i}, k={k}")


def aik_product(i: int, k: int) -> Fraction:
    """Partial-fraction weight from its defining product (evaluation at x = i/(i+1))."""
    _check_ik(i, k)
    r = Fraction(i + 1, i)
    prod = Fraction(1)
    for h in range(1, k + 1):
        if h != i:
            prod *= 1 - Fraction(h, h + 1) * r
    return 1 / prod


def aik_closed(i: int, k: int) -> int:
    _check_ik(i, k)
    return (-1) ** (k - i) * math.comb(k + 1, i + 1) * i**k


def coeff_Aik(i: int, k: int) -> CoeffAik:
    """Weight of ``1/(1 - i x/(i+1))`` in the expansion of the k-th diagonal.

    Both the product and the binomial closed form are evaluated; they must
    agree exactly.
    """
    closed = aik_closed(i, k)
    product = aik_product(i, k)
    if product != closed:
        raise ArithmeticError(f"A[{i},{k}]: product {product} != closed form {closed}")
    return CoeffAik(i, k, closed)
