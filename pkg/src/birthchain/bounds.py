"""Moments of ``X_n`` and certification of its concentration bounds.

Exact quantities come from the recurrence rows; the closed-form mean
``(-1 + sqrt(1 + 8n))/2`` (obtained by solving ``E(T) = n`` for the waiting
time ``T``) is reported alongside as ``mean_approx``. Certifications always
use the exact mean, since the tail theorem is stated for the true mean.
Past the exact limit the float recurrence is used and reports carry
``exact=False``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .chain import ExactDist, _check_step, dist_float, dist_recurrence
from .config import exact_limit
from .errors import DomainError, ResourceLimitError

__all__ = [
    "MomentSet",
    "BoundKind",
    "BoundReport",
    "approx_mean",
    "variance_upper",
    "moments",
    "step_means",
    "chebyshev_report",
    "mcdiarmid_tail_report",
    "centering_check",
    "mgf_report",
    "general_mgf_bound",
]

# beyond this, e^(h k) leaves double range and the MGF is handled in logs
_LOG_SWITCH = 700.0


def approx_mean(n: int) -> float:
    return (-1.0 + math.sqrt(1.0 + 8.0 * n)) / 2.0


def variance_upper(n: int) -> float:
    return -0.5 + math.sqrt(1.0 + 8.0 * n)


@dataclass(frozen=True)
class MomentSet:
    n: int
    mean_exact: Fraction | float
    second_moment_exact: Fraction | float
    variance_exact: Fraction | float
    mean_approx: float
    variance_upper: float
    exact: bool = True


class BoundKind(str, enum.Enum):
    CHEBYSHEV = "chebyshev"
    TAIL_UPPER = "tail_upper"
    TAIL_LOWER = "tail_lower"
    MGF = "mgf"


@dataclass(frozen=True)
class BoundReport:
    n: int
    kind: BoundKind
    parameter: float
    exact_value: float
    bound_value: float
    asymptotic_value: float
    holds: bool
    # the same bound with the closed-form mean/variance substituted
    approx_moment_bound: float | None = None
    exact: bool = True


class _FloatDist:
    """Float stand-in for :class:`ExactDist` past the exact limit."""

    def __init__(self, n: int):
        self.n = n
        self.p = dist_float(n)
        self.k = np.arange(n + 1, dtype=float)

    def raw_moment(self, r: int) -> float:
        return math.fsum(self.p * self.k**r)

    def mean(self) -> float:
        return self.raw_moment(1)

    def variance(self) -> float:
        m = self.mean()
        return math.fsum(self.p * (self.k - m) ** 2)

    def prob_at_least(self, threshold) -> float:
        lo = max(0, math.ceil(threshold))
        return math.fsum(self.p[lo:])

    def prob_at_most(self, threshold) -> float:
        hi = math.floor(threshold)
        return math.fsum(self.p[: hi + 1]) if hi >= 0 else 0.0


def _row(n: int, allow_float: bool):
    if n <= exact_limit():
        return dist_recurrence(n), True
    if not allow_float:
        dist_recurrence(n)  # raises ResourceLimitError with remediation
    return _FloatDist(n), False


def moments(n: int, allow_float: bool = False) -> MomentSet:
    """Exact first two moments of ``X_n`` plus the closed-form mean and variance bound.

    With ``allow_float=True`` a horizon past the exact limit falls back to
    the float recurrence and the result is flagged ``exact=False``.
    """
    _check_step(n)
    row, is_exact = _row(n, allow_float)
    m1 = row.mean()
    m2 = row.raw_moment(2)
    var = m2 - m1 * m1 if is_exact else row.variance()
    return MomentSet(n, m1, m2, var, approx_mean(n), variance_upper(n), is_exact)


def _require_positive_step(n: int) -> None:
    _check_step(n)
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")


def chebyshev_report(n: int, eps: float) -> BoundReport:
    """``P(|X_n - E| >= eps E)`` against ``Var / (eps^2 E^2)``."""
    _require_positive_step(n)
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    row, is_exact = _row(n, allow_float=True)
    e_val = Fraction(eps) if is_exact else float(eps)
    mean = row.mean()
    var = row.raw_moment(2) - mean * mean if is_exact else row.variance()
    tail = row.prob_at_least((1 + e_val) * mean) + row.prob_at_most((1 - e_val) * mean)
    bound = var / (e_val * e_val * mean * mean)
    approx = variance_upper(n) / (eps * eps * approx_mean(n) ** 2)
    return BoundReport(
        n=n,
        kind=BoundKind.CHEBYSHEV,
        parameter=float(eps),
        exact_value=float(tail),
        bound_value=float(bound),
        asymptotic_value=math.sqrt(2.0) / (eps * eps * math.sqrt(n)),
        holds=bool(tail <= bound),
        approx_moment_bound=approx,
        exact=is_exact,
    )


def mcdiarmid_tail_report(n: int, eps: float) -> tuple[BoundReport, BoundReport]:
    """Upper and lower relative-deviation tails against ``exp(-eps^2 E / 3)``."""
    _require_positive_step(n)
    if not 0 < eps < 1:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    row, is_exact = _row(n, allow_float=True)
    e_val = Fraction(eps) if is_exact else float(eps)
    mean = row.mean()
    bound = math.exp(-(eps**2) * float(mean) / 3.0)
    approx = math.exp(-(eps**2) * approx_mean(n) / 3.0)
    asym = math.exp(-(eps**2) * math.sqrt(2.0 * n) / 3.0)
    reports = []
    for kind, tail in (
        (BoundKind.TAIL_UPPER, row.prob_at_least((1 + e_val) * mean)),
        (BoundKind.TAIL_LOWER, row.prob_at_most((1 - e_val) * mean)),
    ):
        reports.append(
            BoundReport(
                n=n,
                kind=kind,
                parameter=float(eps),
                exact_value=float(tail),
                bound_value=bound,
                asymptotic_value=asym,
                holds=float(tail) <= bound,
                approx_moment_bound=approx,
                exact=is_exact,
            )
        )
    return reports[0], reports[1]


def centering_check(n: int) -> bool:
    """Check that the conditional increment mean ``1/(1+x)`` is non-increasing on ``0..n``."""
    _require_positive_step(n)
    mu = [Fraction(1, 1 + x) for x in range(n + 1)]
    return all(a >= b for a, b in zip(mu, mu[1:]))


def _exp_or_inf(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def mgf_report(n: int, h: float) -> BoundReport:
    """``E exp(h X_n)`` against ``(1 - alpha + alpha e^h)^n`` with ``alpha = E X_n / n``.

    ``exact_value`` and ``bound_value`` overflow to ``inf`` for very large
    ``h n``; ``holds`` is then decided on logarithms.
    """
    _require_positive_step(n)
    if not h > 0:
        raise DomainError(f"h must be positive, got {h}")
    row, is_exact = _row(n, allow_float=True)
    mean = float(row.mean())
    alpha = mean / n
    alpha_approx = approx_mean(n) / n
    if h * n < _LOG_SWITCH:
        if is_exact:
            den = int(row.denominator)
            probs = [(k, int(num) / den) for k, num in enumerate(row.numerators) if num]
        else:
            probs = [(k, float(p)) for k, p in enumerate(row.p) if p]
        exact_value = math.fsum(p * math.exp(h * k) for k, p in probs)
        bound_value = (1.0 - alpha + alpha * math.exp(h)) ** n
        holds = exact_value <= bound_value
    else:
        if is_exact:
            log_den = math.log(int(row.denominator))
            logs = [math.log(int(num)) - log_den + h * k for k, num in enumerate(row.numerators) if num]
        else:
            logs = [math.log(p) + h * k for k, p in enumerate(row.p) if p > 0]
        top = max(logs)
        log_exact = top + math.log(math.fsum(math.exp(v - top) for v in logs))
        log_bound = n * (h + math.log(alpha + (1.0 - alpha) * math.exp(-h)))
        holds = log_exact <= log_bound
        exact_value = _exp_or_inf(log_exact)
        bound_value = _exp_or_inf(log_bound)
    return BoundReport(
        n=n,
        kind=BoundKind.MGF,
        parameter=float(h),
        exact_value=exact_value,
        bound_value=bound_value,
        asymptotic_value=_exp_or_inf(math.sqrt(2.0 * n) * math.expm1(h)),
        holds=bool(holds),
        approx_moment_bound=_exp_or_inf(n * math.log1p(alpha_approx * math.expm1(h))),
        exact=is_exact,
    )


def general_mgf_bound(mu: Sequence, a: Sequence, b: Sequence, h: float) -> float:
    """Product bound on ``E exp(h X_n)`` for increments with ``a_k <= Y_k <= b_k`` and means ``mu_k``.

    Each factor is ``(b-mu)/(b-a) e^(h a) + (mu-a)/(b-a) e^(h b)``.
    """
    if not len(mu) == len(a) == len(b):
        raise DomainError("mu, a and b must have equal length")
    factors = []
    for k, (m, lo, hi) in enumerate(zip(mu, a, b), start=1):
        if not lo < hi:
            raise DomainError(f"need a_k < b_k at k={k}, got a={lo}, b={hi}")
        if not lo <= m <= hi:
            raise DomainError(f"mean mu_{k}={m} outside [{lo}, {hi}]")
        w_hi = float((m - lo) / (hi - lo)) if isinstance(m, Fraction) else (m - lo) / (hi - lo)
        factors.append((1.0 - w_hi) * math.exp(h * lo) + w_hi * math.exp(h * hi))
    return math.prod(factors)


def step_means(n: int) -> list[Fraction]:
    """Exact increment means ``E(Y_k) = E(1/(1 + X_{k-1}))`` for ``k = 1..n``."""
    _check_step(n)
    if n - 1 > exact_limit():
        raise ResourceLimitError(f"step means need rows up to {n - 1}", requested=n - 1, limit=exact_limit())
    out = []
    for m in range(n):
        row: ExactDist = dist_recurrence(m)
        out.append(row.expect(lambda x: Fraction(1, 1 + x)))
    return out
