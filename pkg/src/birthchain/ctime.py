"""Continuous-time birth process with rates 1/(1+k).

``p(k, t) = P(X(t) = k)`` is available three ways:

``pkt_closed``
    the exponential mixture ``(1/k!) sum_j (-1)^(k+1-j) j^k C(k+1, j) e^(-t/j)``;
``pkt_uniformization``
    a Poisson(t) mixture of the discrete chain's exact rows (unit clock);
``pkt_ode``
    adaptive Runge-Kutta integration of the forward equations, truncated at
    ``k_max``. Being a pure birth system, truncation does not perturb the
    retained states, and the lost mass ``1 - sum p`` is exactly
    ``P(X(t) > k_max)``.

Time is in units where the rate multiplier is 1; a general multiplier
``lam`` is recovered by evaluating at ``lam * t``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.integrate import solve_ivp
from scipy.stats import poisson

from .chain import _check_step, cancellation_digits, iter_rows
from .config import DOUBLE_DIGITS, check_exact_limit
from .errors import DomainError, PrecisionWarning, ToleranceNotMet

__all__ = [
    "ExpMixture",
    "LaplaceCoeff",
    "exp_mixture",
    "laplace_coeffs",
    "laplace_A_product",
    "laplace_Q_product",
    "pkt_closed",
    "poisson_truncation",
    "uniformization_row",
    "pkt_uniformization",
    "default_kmax",
    "pkt_ode",
]

CANCELLATION_BUDGET = DOUBLE_DIGITS - 3.0


@dataclass(frozen=True)
class ExpMixture:
    """``p(k, t) = sum coeff * exp(-t / inv_rate)`` over ``terms``."""

    k: int
    terms: tuple[tuple[Fraction, int], ...]

    def coefficient_sum(self) -> Fraction:
        return sum((c for c, _ in self.terms), Fraction(0))


@dataclass(frozen=True)
class LaplaceCoeff:
    j: int
    k: int
    A_j: Fraction
    Q_j: Fraction


def _check_time(t: float) -> float:
    t = float(t)
    if not math.isfinite(t) or t < 0:
        raise DomainError(f"t must be finite and nonnegative, got {t}")
    return t


def _check_tol(tol: float) -> float:
    tol = float(tol)
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol}")
    return tol


def exp_mixture(k: int) -> ExpMixture:
    _check_step(k, "k")
    if k == 0:
        return ExpMixture(0, ((Fraction(1), 1),))
    fk = math.factorial(k)
    terms = tuple(
        (Fraction((-1) ** (k + 1 - j) * j**k * math.comb(k + 1, j), fk), j)
        for j in range(1, k + 2)
    )
    return ExpMixture(k, terms)


def laplace_A_product(k: int, j: int) -> Fraction:
    """Residue weight at ``theta = -1/j`` of ``prod_i 1/(theta + 1/i)``."""
    prod = Fraction(1)
    for i in range(1, k + 2):
        if i != j:
            prod *= Fraction(-1, j) + Fraction(1, i)
    return 1 / prod


def laplace_Q_product(k: int, j: int) -> Fraction:
    prod = Fraction(1)
    for i in range(1, k + 2):
        if i != j:
            prod *= Fraction(i, abs(j - i))
    return prod


def laplace_coeffs(k: int) -> list[LaplaceCoeff]:
    """Partial-fraction coefficients of the k-th Laplace transform.

    Each ``A_j`` and ``Q_j`` is computed from its product definition and
    checked exactly against ``(-1)^(k+1-j) j^k C(k+1, j)`` and ``C(k+1, j)``.
    """
    _check_step(k, "k")
    if k == 0:
        raise DomainError("Laplace coefficients are defined for k >= 1")
    out = []
    for j in range(1, k + 2):
        binom = math.comb(k + 1, j)
        a_closed = (-1) ** (k + 1 - j) * j**k * binom
        a_prod = laplace_A_product(k, j)
        q_prod = laplace_Q_product(k, j)
        if a_prod != a_closed or q_prod != binom:
            raise ArithmeticError(f"Laplace coefficient mismatch at k={k}, j={j}")
        out.append(LaplaceCoeff(j, k, Fraction(a_closed), Fraction(binom)))
    return out


def pkt_closed(k: int, t: float) -> float:
    """Closed-form ``p(k, t)``.

    Coefficients are exact rationals rounded once each; terms are summed in
    order of increasing magnitude with ``math.fsum``. A
    :class:`PrecisionWarning` is issued when cancellation eats most of the
    available digits (large ``k``, small ``t``).
    """
    t = _check_time(t)
    mix = exp_mixture(k)
    if k >= 1 and t == 0.0:
        return 0.0
    ordered = sorted(mix.terms, key=lambda term: abs(term[0]))
    terms = [float(c) * math.exp(-t / j) for c, j in ordered]
    value = math.fsum(terms)
    digits = cancellation_digits(terms, value)
    if digits > CANCELLATION_BUDGET:
        warnings.warn(
            f"p({k}, {t}) lost {digits:.1f} digits to cancellation; use pkt_uniformization",
            PrecisionWarning,
            stacklevel=2,
        )
    return value


def poisson_truncation(t: float, tol: float) -> int:
    """Smallest ``N`` with ``P(Poisson(t) > N) < tol / 2``."""
    t = _check_time(t)
    tol = _check_tol(tol)
    n = int(math.floor(t))
    while poisson.sf(n, t) >= tol / 2:
        n += 1
    return n


def uniformization_row(k_max: int, t: float, tol: float = 1e-10) -> np.ndarray:
    """``p(k, t)`` for ``k = 0..k_max`` as Poisson-weighted chain rows."""
    _check_step(k_max, "k_max")
    t = _check_time(t)
    tol = _check_tol(tol)
    out = np.zeros(k_max + 1)
    if t == 0.0:
        out[0] = 1.0
        return out
    horizon = poisson_truncation(t, tol)
    check_exact_limit(horizon, "uniformization horizon")
    weights = poisson.pmf(np.arange(horizon + 1), t)
    acc: list[list[float]] = [[] for _ in range(k_max + 1)]
    for row in iter_rows(horizon):
        w = float(weights[row.n])
        den = int(row.denominator)
        for k in range(min(k_max, row.n) + 1):
            num = row.numerators[k]
            if num:
                acc[k].append(w * (int(num) / den))
    for k in range(k_max + 1):
        out[k] = math.fsum(acc[k])
    return out


def pkt_uniformization(k: int, t: float, tol: float = 1e-10) -> float:
    """``p(k, t)`` within ``tol`` via the subordinated chain."""
    _check_step(k, "k")
    return float(uniformization_row(k, t, tol)[k])


def default_kmax(t: float) -> int:
    return math.ceil(3 * math.sqrt(2 * t)) + 10


def _birth_rhs(_t, p, up_rate):
    dp = -up_rate * p
    dp[1:] += up_rate[:-1] * p[:-1]
    return dp


def pkt_ode(k_max: int | None, t: float, tol: float = 1e-9) -> np.ndarray:
    """Integrate the truncated forward equations from the point mass at 0.

    Returns ``p(0..k_max, t)``. Raises :class:`ToleranceNotMet` when the
    mass that escaped past ``k_max`` is not below ``tol``.
    """
    t = _check_time(t)
    tol = _check_tol(tol)
    if k_max is None:
        k_max = default_kmax(t)
    _check_step(k_max, "k_max")
    p0 = np.zeros(k_max + 1)
    p0[0] = 1.0
    if t == 0.0:
        return p0
    up_rate = 1.0 / (1.0 + np.arange(k_max + 1))
    sol = solve_ivp(
        _birth_rhs,
        (0.0, t),
        p0,
        method="DOP853",
        rtol=tol / 10,
        atol=tol / 1e3,
        args=(up_rate,),
    )
    if not sol.success:
        raise ToleranceNotMet(f"ODE integration failed: {sol.message}", math.nan)
    p = sol.y[:, -1]
    escaped = 1.0 - math.fsum(p)
    if escaped >= tol:
        raise ToleranceNotMet(
            f"truncation at k_max={k_max} leaves mass {escaped:.3e} >= tol {tol:.1e} at t={t}",
            escaped,
        )
    return p
