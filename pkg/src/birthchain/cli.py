"""Command-line front end.

Exit codes: 0 success, 1 verification (or I/O) failure, 2 usage error,
3 resource or tolerance failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import warnings
from fractions import Fraction
from pathlib import Path

from . import bounds, chain, ctime, urn, verify
from .config import exact_limit
from .errors import DomainError, PrecisionExhausted, PrecisionWarning, ResourceLimitError, ToleranceNotMet

SCHEMA_VERSION = "1"

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3


def _nonneg_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {value}")
    return value


def _pos_int(text: str) -> int:
    value = _nonneg_int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _pos_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not value > 0 or not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _nonneg_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if value < 0 or not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"expected a nonnegative number, got {text}")
    return value


def _record(command: str, parameters: dict, results, provenance) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "parameters": parameters,
        "results": results,
        "provenance": provenance,
    }


def _csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _json_text(record: dict) -> str:
    return json.dumps(record, indent=2, allow_nan=True) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    fd, tmp = tempfile.mkstemp(dir=path.parent if str(path.parent) else ".", prefix=f".{path.name}.")
    with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _g17(x: float) -> str:
    return format(x, ".17g")


def cmd_dist(args) -> int:
    params = {"n": args.n, "mode": args.mode}
    if args.mode == "exact":
        row = chain.dist_recurrence(args.n)
        values = [(k, str(p)) for k, p in row.probs.items()]
    else:
        if args.n <= exact_limit():
            probs = chain.dist_recurrence(args.n).to_float()
        else:
            probs = chain.dist_float(args.n)
        support = [0] if args.n == 0 else range(1, args.n + 1)
        values = [(k, float(probs[k])) for k in support if probs[k] != 0.0]
    if args.format == "csv":
        text = _csv_text(["k", "p"], [(k, p if isinstance(p, str) else _g17(p)) for k, p in values])
    else:
        rows = [{"k": k, "p": p, "method": "recurrence"} for k, p in values]
        text = _json_text(_record("dist", params, rows, {"p": "recurrence"}))
    _emit(text, args.out)
    return EXIT_OK


def _ctime_auto(kmax: int, t: float, tol: float) -> list[tuple[float, str]]:
    """Closed form where it is well conditioned, uniformization elsewhere."""
    out = []
    fallback = None
    for k in range(kmax + 1):
        with warnings.catch_warnings():
            warnings.simplefilter("error", PrecisionWarning)
            try:
                out.append((ctime.pkt_closed(k, t), "closed_form"))
                continue
            except PrecisionWarning:
                pass
        if fallback is None:
            fallback = ctime.uniformization_row(kmax, t, tol)
        out.append((float(fallback[k]), "uniformization"))
    return out


def cmd_ctime(args) -> int:
    params = {"t": args.t, "kmax": args.kmax, "method": args.method, "tol": args.tol}
    if args.method == "auto":
        pairs = _ctime_auto(args.kmax, args.t, args.tol)
    elif args.method == "closed":
        pairs = [(ctime.pkt_closed(k, args.t), "closed_form") for k in range(args.kmax + 1)]
    elif args.method == "uniformization":
        pairs = [(v, "uniformization") for v in ctime.uniformization_row(args.kmax, args.t, args.tol)]
    else:
        k_full = max(args.kmax, ctime.default_kmax(args.t))
        pairs = [(v, "ode") for v in list(ctime.pkt_ode(k_full, args.t, args.tol))[: args.kmax + 1]]
    pairs = [(float(v), m) for v, m in pairs]
    if args.format == "csv":
        text = _csv_text(["k", "p", "method"], [(k, repr(v), m) for k, (v, m) in enumerate(pairs)])
    else:
        rows = [{"k": k, "p": v, "method": m} for k, (v, m) in enumerate(pairs)]
        used = sorted({m for _, m in pairs})
        text = _json_text(_record("ctime", params, rows, {"p": used[0] if len(used) == 1 else "per-row"}))
    _emit(text, args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = urn.SimConfig(args.n, args.reps, args.seed, urn.Method.parse(args.method))
    summary = urn.simulate(cfg, workers=args.workers)
    if args.histogram:
        urn.histogram_export(summary, args.histogram)
    params = {"n": cfg.n, "reps": cfg.reps, "seed": cfg.seed, "method": cfg.method.value}
    if args.format == "csv":
        text = _csv_text(
            ["k", "count", "frequency"],
            [(k, summary.counts[k], repr(summary.empirical[k])) for k in sorted(summary.empirical)],
        )
    else:
        results = {
            "empirical": [
                {"k": k, "count": summary.counts[k], "frequency": summary.empirical[k]}
                for k in sorted(summary.empirical)
            ],
            "mean": summary.mean,
            "variance": summary.variance,
            "stderr_mean": summary.stderr_mean,
            "reps": summary.reps,
            "seed": summary.seed,
        }
        text = _json_text(_record("simulate", params, results, {"*": "simulation"}))
    _emit(text, args.out)
    return EXIT_OK


def _num(x) -> str | float:
    return str(x) if isinstance(x, Fraction) else float(x)


def _report_dict(r: bounds.BoundReport) -> dict:
    return {
        "n": r.n,
        "kind": r.kind.value,
        "parameter": r.parameter,
        "exact_value": r.exact_value,
        "bound_value": r.bound_value,
        "asymptotic_value": r.asymptotic_value,
        "approx_moment_bound": r.approx_moment_bound,
        "holds": r.holds,
        "method": "recurrence" if r.exact else "recurrence_float",
    }


def _plot_rows(n_max: int):
    for row in chain.iter_rows(n_max):
        if row.n == 0:
            continue
        yield (
            row.n,
            float(row.mean()),
            bounds.approx_mean(row.n),
            float(row.variance()),
            bounds.variance_upper(row.n),
        )


def cmd_bounds(args) -> int:
    params = {"n": args.n, "eps": args.eps, "h": args.h, "plot_data": args.plot_data}
    if args.plot_data:
        header = ["n", "exact_mean", "approx_mean", "variance", "variance_bound"]
        rows = list(_plot_rows(args.n))
        if args.format == "csv":
            text = _csv_text(header, [[r[0]] + [repr(v) for v in r[1:]] for r in rows])
        else:
            table = [dict(zip(header, r)) for r in rows]
            prov = {"exact_mean": "recurrence", "variance": "recurrence", "approx_mean": "bound", "variance_bound": "bound"}
            text = _json_text(_record("bounds", params, table, prov))
        _emit(text, args.out)
        return EXIT_OK

    if args.n < 1:
        raise DomainError("bounds need n >= 1")
    m = bounds.moments(args.n, allow_float=True)
    reports = []
    for eps in args.eps:
        reports.append(bounds.chebyshev_report(args.n, eps))
        if 0 < eps < 1:
            reports.extend(bounds.mcdiarmid_tail_report(args.n, eps))
    for h in args.h:
        reports.append(bounds.mgf_report(args.n, h))
    if args.format == "csv":
        header = ["kind", "n", "parameter", "exact_value", "bound_value", "asymptotic_value", "holds"]
        text = _csv_text(
            header,
            [
                (r.kind.value, r.n, repr(r.parameter), repr(r.exact_value), repr(r.bound_value), repr(r.asymptotic_value), str(r.holds).lower())
                for r in reports
            ],
        )
    else:
        source = "recurrence" if m.exact else "recurrence_float"
        results = {
            "moments": {
                "mean_exact": _num(m.mean_exact),
                "second_moment_exact": _num(m.second_moment_exact),
                "variance_exact": _num(m.variance_exact),
                "mean_approx": m.mean_approx,
                "variance_upper": m.variance_upper,
            },
            "reports": [_report_dict(r) for r in reports],
        }
        prov = {
            "mean_exact": source,
            "second_moment_exact": source,
            "variance_exact": source,
            "mean_approx": "bound",
            "variance_upper": "bound",
            "reports.exact_value": source,
            "reports.bound_value": "bound",
        }
        text = _json_text(_record("bounds", params, results, prov))
    _emit(text, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    checks = verify.run_suite(args.suite, args.max_n, args.tol)
    ok = all(c.passed for c in checks)
    results = [
        {"suite": c.suite, "name": c.name, "passed": c.passed, "counterexample": c.counterexample}
        for c in checks
    ]
    params = {"suite": args.suite, "max_n": args.max_n, "tol": args.tol}
    if args.format == "csv":
        text = _csv_text(["suite", "name", "passed"], [(c.suite, c.name, str(c.passed).lower()) for c in checks])
    else:
        text = _json_text(_record("verify", params, {"passed": ok, "checks": results}, {"*": "verification"}))
    _emit(text, args.out)
    if not ok:
        first = next(c for c in checks if not c.passed)
        print(f"FAIL {first.suite}: {first.name}: {first.counterexample}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_coeffs(args) -> int:
    k = args.k
    aik = [chain.coeff_Aik(i, k) for i in range(1, k + 1)]
    lap = ctime.laplace_coeffs(k)
    if args.format == "csv":
        rows = [("A_ik", c.i, str(c.value)) for c in aik]
        rows += [("A_j", c.j, str(c.A_j)) for c in lap]
        rows += [("Q_j", c.j, str(c.Q_j)) for c in lap]
        text = _csv_text(["name", "index", "value"], rows)
    else:
        results = {
            "A_ik": [{"i": c.i, "k": c.k, "value": str(c.value)} for c in aik],
            "laplace": [{"j": c.j, "k": c.k, "A_j": str(c.A_j), "Q_j": str(c.Q_j)} for c in lap],
        }
        text = _json_text(_record("coeffs", {"k": k}, results, {"*": "closed_form"}))
    _emit(text, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="birthchain",
        description="Transient law of the birth process with rates 1/(1+k) and its subordinated chain.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", help="write to this file instead of stdout")

    p = sub.add_parser("dist", help="n-step law of the discrete chain")
    p.add_argument("--n", type=_nonneg_int, required=True)
    p.add_argument("--mode", choices=("exact", "float"), default="exact")
    common(p)
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("ctime", help="p(k, t) of the continuous-time process")
    p.add_argument("--t", type=_nonneg_float, required=True)
    p.add_argument("--kmax", type=_nonneg_int, default=10)
    p.add_argument("--method", choices=("auto", "closed", "uniformization", "ode"), default="auto")
    p.add_argument("--tol", type=_pos_float, default=1e-10)
    common(p)
    p.set_defaults(func=cmd_ctime)

    p = sub.add_parser("simulate", help="Monte Carlo of the urn scheme")
    p.add_argument("--n", type=_nonneg_int, required=True)
    p.add_argument("--reps", type=_pos_int, default=100_000)
    p.add_argument("--seed", type=_nonneg_int, default=0)
    p.add_argument(
        "--method",
        choices=("bernoulli", "geometric", "bernoulli_scheme", "geometric_waits"),
        default="bernoulli",
    )
    p.add_argument("--histogram", help="also write a k,frequency,exact CSV here")
    p.add_argument("--workers", type=_pos_int, default=1)
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bounds", help="moments and concentration-bound certification")
    p.add_argument("--n", type=_nonneg_int, required=True)
    p.add_argument("--eps", type=_pos_float, nargs="+", default=[0.25, 0.5, 0.75])
    p.add_argument("--h", type=_pos_float, nargs="+", default=[0.1, 0.5, 1.0, 2.0])
    p.add_argument(
        "--plot-data",
        action="store_true",
        help="emit n, exact_mean, approx_mean, variance, variance_bound for n = 1..N",
    )
    common(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("verify", help="run invariant suites")
    p.add_argument("--suite", choices=verify.SUITES, default="all")
    p.add_argument("--max-n", type=_nonneg_int, default=None)
    p.add_argument("--tol", type=_pos_float, default=None)
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("coeffs", help="exact partial-fraction coefficients")
    p.add_argument("--k", type=_pos_int, required=True)
    common(p)
    p.set_defaults(func=cmd_coeffs)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"birthchain {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimitError as exc:
        hint = "; try --mode float" if args.command == "dist" else ""
        print(f"birthchain {args.command}: {exc}{hint}", file=sys.stderr)
        return EXIT_RESOURCE
    except ToleranceNotMet as exc:
        print(f"birthchain {args.command}: {exc} (achieved {exc.achieved:.3e})", file=sys.stderr)
        return EXIT_RESOURCE
    except PrecisionExhausted as exc:
        print(f"birthchain {args.command}: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except OSError as exc:
        print(f"birthchain {args.command}: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
