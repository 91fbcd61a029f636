"""Bivariate generating function ``F(x, y) = sum_{n,k} p[n][k] x^n y^k``.

Its diagonal decomposition is

    F(x, y) = sum_k c_k(x) y^k,
    c_k(x) = x^k / (k! * prod_{h=1..k} (1 - h x / (h+1))),

and every ``c_k`` splits into simple poles with weights ``A[i,k]`` (see
:func:`birthchain.chain.coeff_Aik`). Everything here is exact rational
arithmetic; floats appear only in returned residuals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .chain import aik_closed, aik_product
from .config import DEFAULT_SERIES_LIMIT
from .errors import DomainError, ResourceLimitError

__all__ = [
    "SeriesGrid",
    "f_series",
    "diagonal_coeff",
    "ode_residual",
    "partial_fraction_check",
    "aik_brackets",
    "verify_identity_aik",
]


@dataclass(frozen=True)
class SeriesGrid:
    """Coefficients ``coeffs[n][k]`` of ``x^n y^k`` for ``0 <= n, k <= N``."""

    N: int
    coeffs: tuple[tuple[Fraction, ...], ...]

    def __getitem__(self, nk: tuple[int, int]) -> Fraction:
        n, k = nk
        return self.coeffs[n][k]


def _poly_mul(a: list[Fraction], b: list[Fraction], degree: int) -> list[Fraction]:
    out = [Fraction(0)] * (degree + 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j in range(min(len(b), degree + 1 - i)):
            out[i + j] += ai * b[j]
    return out


def f_series(N: int, limit: int = DEFAULT_SERIES_LIMIT) -> SeriesGrid:
    """Expand ``F`` to order ``N`` in both variables.

    Each diagonal term is a product of geometric series
    ``1/(1 - r x) = sum r^m x^m`` with ``r = h/(h+1)``, truncated at the
    degree still visible in the grid.
    """
    if isinstance(N, bool) or not isinstance(N, int) or N < 0:
        raise DomainError(f"N must be a nonnegative integer, got {N!r}")
    if N > limit:
        raise ResourceLimitError(f"series order {N} exceeds limit {limit}", requested=N, limit=limit)
    grid = [[Fraction(0)] * (N + 1) for _ in range(N + 1)]
    grid[0][0] = Fraction(1)
    # running product prod_{h=1..k} 1/(1 - h x/(h+1)), truncated at degree N
    prod = [Fraction(1)] + [Fraction(0)] * N
    for k in range(1, N + 1):
        r = Fraction(k, k + 1)
        geometric = [r**m for m in range(N - k + 1)]
        prod = _poly_mul(prod, geometric, N - k)
        scale = Fraction(1, math.factorial(k))
        for m, c in enumerate(prod[: N - k + 1]):
            grid[k + m][k] = c * scale
    return SeriesGrid(N, tuple(tuple(row) for row in grid))


def _as_rational(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        # read floats by their shortest decimal form, so 0.2 means 1/5
        return Fraction(repr(v))
    return Fraction(v)


def diagonal_coeff(k: int, x) -> Fraction:
    """``c_k(x)``, the coefficient of ``y^k`` in ``F(x, y)``."""
    x = _as_rational(x)
    denom = Fraction(math.factorial(k))
    for h in range(1, k + 1):
        denom *= 1 - Fraction(h, h + 1) * x
    return x**k / denom


def ode_residual(x, y, N: int) -> float:
    """Residual of ``y a F_yy + (b - y) F_y - 2F`` on ``F`` truncated at ``y^N``.

    Here ``a = (1-x)/x`` and ``b = (2-x)/x``. The coefficient functions
    ``c_k(x)`` are kept exact, so the only error is the truncation in ``y``;
    the residual is evaluated in exact arithmetic and rounded once.
    """
    x = _as_rational(x)
    y = _as_rational(y)
    if x == 0:
        raise DomainError("the differential equation divides by x; x = 0 is excluded")
    if not 0 < x < 1 or not 0 <= y < 1:
        raise DomainError(f"need 0 < x < 1 and 0 <= y < 1, got x={x}, y={y}")
    if N < 0:
        raise DomainError(f"N must be nonnegative, got {N}")
    a = (1 - x) / x
    b = (2 - x) / x
    c = [diagonal_coeff(k, x) for k in range(N + 1)]
    F = sum((ck * y**k for k, ck in enumerate(c)), Fraction(0))
    Fy = sum((k * ck * y ** (k - 1) for k, ck in enumerate(c) if k >= 1), Fraction(0))
    Fyy = sum((k * (k - 1) * ck * y ** (k - 2) for k, ck in enumerate(c) if k >= 2), Fraction(0))
    return float(y * a * Fyy + (b - y) * Fy - 2 * F)


def _poly_from_linear_factors(factors: list[tuple[Fraction, Fraction]]) -> list[Fraction]:
    poly = [Fraction(1)]
    for c0, c1 in factors:
        nxt = [Fraction(0)] * (len(poly) + 1)
        for d, p in enumerate(poly):
            nxt[d] += p * c0
            nxt[d + 1] += p * c1
        poly = nxt
    return poly


def partial_fraction_check(k: int) -> bool:
    """Exact check that ``sum_i A[i,k] prod_{h != i} (1 - h x/(h+1)) == 1``."""
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    total = [Fraction(0)] * k
    for i in range(1, k + 1):
        factors = [(Fraction(1), -Fraction(h, h + 1)) for h in range(1, k + 1) if h != i]
        weight = aik_closed(i, k)
        for d, coef in enumerate(_poly_from_linear_factors(factors)):
            total[d] += weight * coef
    return total[0] == 1 and all(c == 0 for c in total[1:])


def aik_brackets(k: int) -> list[Fraction]:
    """``A[i,k] r_i - k/(k+1) A[i,k] - A[i,k-1] r_i`` with ``r_i = i/(i+1)``, for i < k."""
    if k < 2:
        raise DomainError(f"k must be >= 2, got {k}")
    out = []
    for i in range(1, k):
        r = Fraction(i, i + 1)
        a_k = aik_product(i, k)
        a_prev = aik_product(i, k - 1)
        out.append(a_k * r - Fraction(k, k + 1) * a_k - a_prev * r)
    return out


def verify_identity_aik(k: int) -> bool:
    """True iff every bracket in :func:`aik_brackets` vanishes."""
    return all(v == 0 for v in aik_brackets(k))
