"""Acceptance gate: one test per criterion, each reported as a PASS/FAIL line."""

import math
from fractions import Fraction
import subprocess
import sys
import time
import warnings

import numpy as np
import pytest

from birthchain import bounds, chain, ctime, genfunc, urn
from birthchain.errors import PrecisionExhausted, PrecisionWarning

TIMES = (0.1, 0.5, 1.0, 2.0, 5.0)


def test_c01_closed_form_equivalence(criterion):
    start = time.perf_counter()
    mismatches = [
        (row.n, k)
        for row in chain.iter_rows(60)
        for k in range(1, row.n + 1)
        if chain.pnk_closed_exact(row.n, k) != row[k]
    ]
    elapsed = time.perf_counter() - start
    ok = not mismatches and elapsed < 10
    criterion(1, "closed form equals recurrence exactly, 1 <= k <= n <= 60", ok, f"{elapsed:.2f}s")
    assert not mismatches, mismatches[:5]
    assert elapsed < 10


def test_c02_normalization(criterion):
    start = time.perf_counter()
    bad = [row.n for row in chain.iter_rows(500) if row.total() != 1]
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 30
    criterion(2, "exact rows sum to 1 for n <= 500", ok, f"{elapsed:.2f}s")
    assert not bad
    assert elapsed < 30


def test_c03_continuous_closed_form(criterion):
    worst_ode = worst_uni = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PrecisionWarning)
        for t in TIMES:
            ode = ctime.pkt_ode(None, t, 1e-9)
            for k in range(11):
                closed = ctime.pkt_closed(k, t)
                worst_ode = max(worst_ode, abs(closed - ode[k]))
                worst_uni = max(worst_uni, abs(closed - ctime.pkt_uniformization(k, t, 1e-10)))
    zero_sums = all(ctime.exp_mixture(k).coefficient_sum() == 0 for k in range(1, 31))
    ok = worst_ode < 1e-7 and worst_uni < 1e-9 and zero_sums
    criterion(3, "continuous closed form vs ODE and uniformization", ok, f"ode {worst_ode:.1e}, unif {worst_uni:.1e}")
    assert worst_ode < 1e-7
    assert worst_uni < 1e-9
    assert zero_sums


def test_c04_laplace_coefficients(criterion):
    ok = all(
        ctime.laplace_A_product(k, j) == (-1) ** (k + 1 - j) * j**k * math.comb(k + 1, j)
        and ctime.laplace_Q_product(k, j) == math.comb(k + 1, j)
        for k in range(1, 31)
        for j in range(1, k + 2)
    )
    criterion(4, "Laplace A_j and Q_j product forms, k <= 30", ok)
    assert ok


def test_c05_generating_function(criterion):
    grid = genfunc.f_series(25)
    coeffs_ok = all(grid[row.n, k] == row[k] for row in chain.iter_rows(25) for k in range(26))
    decay_ok = True
    worst_final = 0.0
    for x in (0.1, 0.2, 0.5):
        for y in (0.1, 0.3, 0.5):
            res = [abs(genfunc.ode_residual(x, y, N)) for N in range(20, 61, 10)]
            decay_ok &= all(b < a for a, b in zip(res, res[1:]))
            worst_final = max(worst_final, res[-1])
    ident_ok = all(genfunc.partial_fraction_check(k) for k in range(1, 41)) and all(
        genfunc.verify_identity_aik(k) for k in range(2, 41)
    )
    ok = coeffs_ok and decay_ok and worst_final < 1e-8 and ident_ok
    criterion(5, "generating function coefficients, ODE residual, identities", ok, f"residual {worst_final:.1e}")
    assert coeffs_ok and decay_ok and ident_ok
    assert worst_final < 1e-8


def test_c06_simulation_calibration(criterion):
    start = time.perf_counter()
    reps = 10**6
    s = urn.simulate(urn.SimConfig(3, reps, 20240601), workers=4)
    exact = {1: 1 / 4, 2: 7 / 12, 3: 1 / 6}
    z = max(abs(s.empirical.get(k, 0.0) - p) / math.sqrt(p * (1 - p) / reps) for k, p in exact.items())
    p_values = []
    for n in (5, 20, 50):
        a = urn.simulate(urn.SimConfig(n, 10**5, 1000 + n, urn.Method.BERNOULLI_SCHEME), workers=4)
        b = urn.simulate(urn.SimConfig(n, 10**5, 2000 + n, urn.Method.GEOMETRIC_WAITS), workers=4)
        p_values.append(urn.two_sample_chi2(a.counts, b.counts)[1])
    elapsed = time.perf_counter() - start
    ok = set(s.empirical) == set(exact) and z <= 4 and min(p_values) >= 1e-3 and elapsed < 60
    criterion(6, "simulation calibration and sampler equivalence", ok, f"max z {z:.2f}, min p {min(p_values):.3f}, {elapsed:.1f}s")
    assert set(s.empirical) == set(exact)
    assert z <= 4
    assert min(p_values) >= 1e-3
    assert elapsed < 60


def test_c07_moment_bounds(criterion):
    second_bad, var_bad = [], []
    for row in chain.iter_rows(500):
        n = row.n
        if row.raw_moment(2) > 2 * n:
            second_bad.append(n)
        if float(row.variance()) > bounds.variance_upper(n):
            var_bad.append(n)
    ratios = [float(bounds.moments(n, allow_float=True).mean_exact) / bounds.approx_mean(n) for n in (10, 100, 1000)]
    approaching = all(abs(1 - b) < abs(1 - a) for a, b in zip(ratios, ratios[1:]))
    m3 = bounds.moments(3)
    example = m3.mean_exact == Fraction(23, 12) and m3.mean_approx == 2.0
    ok = not second_bad and not var_bad and approaching and example
    criterion(7, "E X^2 <= 2n, variance bound, mean ratio -> 1", ok, "ratios " + ", ".join(f"{r:.4f}" for r in ratios))
    assert not second_bad and not var_bad
    assert approaching
    assert example


def test_c08_concentration(criterion):
    failures = []
    for n in (10, 50, 200, 500):
        for eps in (0.25, 0.5, 0.75):
            up, lo = bounds.mcdiarmid_tail_report(n, eps)
            cheb = bounds.chebyshev_report(n, eps)
            if not (up.holds and lo.holds and cheb.holds):
                failures.append(("tail", n, eps))
    for n in (10, 50, 200):
        for h in (0.1, 0.5, 1.0, 2.0):
            if not bounds.mgf_report(n, h).holds:
                failures.append(("mgf", n, h))
    equality = all(
        bounds.mgf_report(1, h).exact_value == bounds.mgf_report(1, h).bound_value for h in (0.1, 0.5, 1.0, 2.0)
    )
    ok = not failures and equality
    criterion(8, "tail, Chebyshev and MGF bounds certified", ok)
    assert not failures, failures
    assert equality


def test_c09_cancellation_regression(criterion):
    worst = None
    for n in range(35, 81):
        for k in range(35, n + 1):
            try:
                digits = chain.pnk_closed_float(n, k).cancellation_digits
            except PrecisionExhausted as exc:
                digits = exc.cancellation_digits
            if digits > 12:
                worst = (n, k, digits)
                break
        if worst:
            break
    tiny = np.finfo(float).tiny
    rel = 0.0
    for row in chain.iter_rows(200):
        exact = row.to_float()
        approx = chain.dist_float(row.n)
        mask = exact >= tiny
        if mask.any():
            rel = max(rel, float(np.max(np.abs(approx[mask] - exact[mask]) / exact[mask])))
    ok = worst is not None and rel <= 1e-12
    detail = (f"n={worst[0]}, k={worst[1]}: {worst[2]:.1f} digits" if worst else "none found") + f"; recurrence rel err {rel:.1e}"
    criterion(9, "closed-form cancellation detected, float recurrence accurate", ok, detail)
    assert worst is not None
    assert rel <= 1e-12


@pytest.mark.parametrize("method", ["bernoulli", "geometric"])
def test_c10_reproducibility(criterion, method):
    cmd = [sys.executable, "-m", "birthchain", "simulate", "--n", "40", "--reps", "200000", "--seed", "99", "--method", method]
    first = subprocess.run(cmd, capture_output=True, check=True).stdout
    second = subprocess.run(cmd, capture_output=True, check=True).stdout
    ok = first == second and len(first) > 0
    criterion(10, f"simulate output byte-identical across runs ({method})", ok)
    assert ok
