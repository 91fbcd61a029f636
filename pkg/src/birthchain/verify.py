"""Invariant suites behind ``birthchain verify``.

Each suite returns a list of :class:`Check`; a failed check carries the
first counterexample it found.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from . import bounds, chain, ctime, genfunc, urn
from .errors import PrecisionWarning

SUITES = ("all", "closedform", "genfunc", "uniformization", "bounds", "simulation")


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    passed: bool
    counterexample: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))


def _first_failure(cases, predicate: Callable) -> str | None:
    for case in cases:
        ok, detail = predicate(case)
        if not ok:
            return detail
    return None


def closedform_suite(max_n: int = 30, tol: float = 1e-12) -> list[Check]:
    out = []
    failure = None
    for row in chain.iter_rows(max_n):
        if row.total() != 1:
            failure = failure or f"n={row.n}: row sums to {row.total()}"
        for k in range(1, row.n + 1):
            if chain.pnk_closed_exact(row.n, k) != row[k]:
                failure = failure or f"n={row.n}, k={k}: closed form {chain.pnk_closed_exact(row.n, k)} != {row[k]}"
                break
    out.append(Check("closedform", "closed form equals recurrence and rows normalize", failure is None, failure))

    def support(n):
        row = chain.dist_recurrence(n)
        expected = {0} if n == 0 else set(range(1, n + 1))
        if set(row.support) != expected:
            return False, f"n={n}: support {row.support}"
        if n >= 1 and row[n] != Fraction(1, math.factorial(n)):
            return False, f"n={n}: top state {row[n]} != 1/{n}!"
        return True, None

    failure = _first_failure(range(max_n + 1), support)
    out.append(Check("closedform", "support is {1..n} with p[n][n] = 1/n!", failure is None, failure))

    kmax = min(max_n, 40)
    failure = _first_failure(
        [(i, k) for k in range(1, kmax + 1) for i in range(1, k + 1)],
        lambda ik: (chain.aik_product(*ik) == chain.aik_closed(*ik), f"A[{ik[0]},{ik[1]}] mismatch"),
    )
    out.append(Check("closedform", "A[i,k] product form equals binomial form", failure is None, failure))

    exact_floats = chain.dist_recurrence(max_n).to_float()
    approx = chain.dist_float(max_n)
    worst = max(
        (abs(a - e) / e for a, e in zip(approx, exact_floats) if e >= 2.2250738585072014e-308),
        default=0.0,
    )
    out.append(
        Check(
            "closedform",
            f"float recurrence within {tol:g} relative of exact at n={max_n}",
            worst <= tol,
            None if worst <= tol else f"relative error {worst:.3e}",
        )
    )
    return out


def genfunc_suite(max_n: int = 15, tol: float = 1e-8) -> list[Check]:
    out = []
    order = min(max_n, 60)
    grid = genfunc.f_series(order)
    failure = None
    for row in chain.iter_rows(order):
        for k in range(order + 1):
            if grid[row.n, k] != row[k]:
                failure = f"coefficient x^{row.n} y^{k}: {grid[row.n, k]} != {row[k]}"
                break
        if failure:
            break
    out.append(Check("genfunc", f"series coefficients equal recurrence up to order {order}", failure is None, failure))

    kmax = min(max(max_n, 2), 40)
    failure = _first_failure(range(1, kmax + 1), lambda k: (genfunc.partial_fraction_check(k), f"k={k}"))
    out.append(Check("genfunc", "partial fraction identity", failure is None, failure))
    failure = _first_failure(range(2, kmax + 1), lambda k: (genfunc.verify_identity_aik(k), f"k={k}"))
    out.append(Check("genfunc", "A[i,k] bracket identity", failure is None, failure))

    def residual_decay(xy):
        x, y = xy
        values = [abs(genfunc.ode_residual(x, y, N)) for N in range(20, 61, 10)]
        decreasing = all(b < a for a, b in zip(values, values[1:]))
        return decreasing and values[-1] < tol, f"(x, y)=({x}, {y}): residuals {values}"

    pts = [(x, y) for x in ("1/10", "1/5", "1/2") for y in ("1/10", "3/10", "1/2")]
    failure = _first_failure(pts, residual_decay)
    out.append(Check("genfunc", "ODE residual decays with truncation order", failure is None, failure))
    return out


def uniformization_suite(max_n: int = 10, tol: float = 1e-10) -> list[Check]:
    out = []
    kmax = min(max_n, 10)
    worst_u = worst_o = 0.0
    where_u = where_o = None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PrecisionWarning)
        for t in (0.1, 0.5, 1.0, 2.0, 5.0):
            uni = ctime.uniformization_row(kmax, t, tol)
            ode = ctime.pkt_ode(max(kmax, ctime.default_kmax(t)), t, 1e-8)
            for k in range(kmax + 1):
                closed = ctime.pkt_closed(k, t)
                if abs(closed - uni[k]) > worst_u:
                    worst_u, where_u = abs(closed - uni[k]), (k, t)
                if abs(closed - ode[k]) > worst_o:
                    worst_o, where_o = abs(closed - ode[k]), (k, t)
    ok = worst_u < 1e-9
    out.append(Check("uniformization", "closed form vs uniformization < 1e-9", ok, None if ok else f"(k, t)={where_u}: {worst_u:.3e}"))
    ok = worst_o < 1e-7
    out.append(Check("uniformization", "closed form vs ODE < 1e-7", ok, None if ok else f"(k, t)={where_o}: {worst_o:.3e}"))

    failure = _first_failure(
        range(1, 31),
        lambda k: (ctime.exp_mixture(k).coefficient_sum() == 0, f"k={k}: coefficients sum to {ctime.exp_mixture(k).coefficient_sum()}"),
    )
    out.append(Check("uniformization", "mixture coefficients sum to zero", failure is None, failure))

    def laplace_ok(k):
        try:
            ctime.laplace_coeffs(k)
        except ArithmeticError as exc:
            return False, str(exc)
        return True, None

    failure = _first_failure(range(1, 31), laplace_ok)
    out.append(Check("uniformization", "Laplace A_j and Q_j product forms match closed forms", failure is None, failure))
    return out


def bounds_suite(max_n: int = 200, tol: float = 1e-9) -> list[Check]:
    out = []
    failures = {"second": None, "variance": None}
    for row in chain.iter_rows(max_n):
        n = row.n
        m2 = row.raw_moment(2)
        if m2 > 2 * n:
            failures["second"] = failures["second"] or f"n={n}: E X^2 = {float(m2)} > {2 * n}"
        var = float(row.variance())
        if var > bounds.variance_upper(n) + tol:
            failures["variance"] = failures["variance"] or f"n={n}: Var = {var} > {bounds.variance_upper(n)}"
    out.append(Check("bounds", "second moment <= 2n", failures["second"] is None, failures["second"]))
    out.append(Check("bounds", "variance <= -1/2 + sqrt(1+8n)", failures["variance"] is None, failures["variance"]))

    tail_cases = [(n, e) for n in (10, 50, 200, 500) if n <= max_n for e in (0.25, 0.5, 0.75)]

    def tails(case):
        up, lo = bounds.mcdiarmid_tail_report(*case)
        cheb = bounds.chebyshev_report(*case)
        return up.holds and lo.holds and cheb.holds, f"(n, eps)={case}: {up}, {lo}, {cheb}"

    failure = _first_failure(tail_cases, tails)
    out.append(Check("bounds", "centering tail and Chebyshev bounds hold", failure is None, failure))

    mgf_cases = [(n, h) for n in (10, 50, 200) if n <= max_n for h in (0.1, 0.5, 1.0, 2.0)]
    failure = _first_failure(mgf_cases, lambda c: (bounds.mgf_report(*c).holds, f"(n, h)={c}: {bounds.mgf_report(*c)}"))
    out.append(Check("bounds", "MGF bound holds", failure is None, failure))

    ok = bounds.centering_check(max(max_n, 1))
    out.append(Check("bounds", "increment mean is non-increasing", ok, None if ok else f"n={max_n}"))
    return out


def simulation_suite(max_n: int = 20, alpha: float = 1e-3, reps: int = 100_000, seed: int = 20240601) -> list[Check]:
    out = []
    n = min(max_n, 20)
    exact = chain.dist_recurrence(n)
    summary = urn.simulate(urn.SimConfig(n, reps, seed))
    worst = 0.0
    for k in exact.support:
        p = float(exact[k])
        se = math.sqrt(p * (1 - p) / reps)
        worst = max(worst, abs(summary.empirical.get(k, 0.0) - p) / se)
    out.append(Check("simulation", f"frequencies within 4 standard errors at n={n}", worst <= 4, None if worst <= 4 else f"{worst:.2f} standard errors"))

    failure = None
    for m in (5, 20, 50):
        if m > max(max_n, 5):
            continue
        a = urn.simulate(urn.SimConfig(m, reps, seed, urn.Method.BERNOULLI_SCHEME))
        b = urn.simulate(urn.SimConfig(m, reps, seed + 1, urn.Method.GEOMETRIC_WAITS))
        _, p_value, _ = urn.two_sample_chi2(a.counts, b.counts)
        if p_value < alpha:
            failure = f"n={m}: chi-square p-value {p_value:.2e}"
            break
    out.append(Check("simulation", f"samplers agree (chi-square at alpha={alpha:g})", failure is None, failure))

    again = urn.simulate(urn.SimConfig(n, reps, seed), workers=4)
    out.append(Check("simulation", "identical configuration gives identical summary", again == summary, None))
    return out


_RUNNERS = {
    "closedform": closedform_suite,
    "genfunc": genfunc_suite,
    "uniformization": uniformization_suite,
    "bounds": bounds_suite,
    "simulation": simulation_suite,
}


def run_suite(suite: str, max_n: int | None = None, tol: float | None = None) -> list[Check]:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    names = list(_RUNNERS) if suite == "all" else [suite]
    results = []
    for name in names:
        kwargs = {}
        if max_n is not None:
            kwargs["max_n"] = max_n
        # the simulation suite tests at a fixed significance level instead
        if tol is not None and name != "simulation":
            kwargs["tol"] = tol
        results.extend(_RUNNERS[name](**kwargs))
    return results
