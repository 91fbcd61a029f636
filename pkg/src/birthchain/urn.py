"""Monte Carlo for the degenerate Polya urn / dependent Bernoulli scheme.

Two samplers of ``X_n`` are provided:

* ``bernoulli_scheme``: ``Y_m ~ Ber(1/(1 + Y_1 + ... + Y_{m-1}))`` drawn
  sequentially, ``X_n = Y_1 + ... + Y_n``;
* ``geometric_waits``: ``tau_i ~ Geom(1/i)`` on ``{1, 2, ...}``, and ``X_n``
  is the number of partial sums ``tau_1 + ... + tau_k`` that are ``<= n``.

Replications are split into fixed-size blocks. Block ``b`` draws from a
Philox stream keyed by ``SeedSequence(seed, spawn_key=(b,))``, so results do
not depend on how blocks are scheduled or how many workers run them.
"""

from __future__ import annotations

import csv
import enum
import io
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.stats import chi2_contingency

from .chain import _check_step, dist_recurrence
from .config import exact_limit
from .errors import DomainError

__all__ = [
    "Method",
    "SimConfig",
    "SimSummary",
    "BLOCK_SIZE",
    "simulate",
    "sample_paths",
    "expected_trials",
    "histogram_export",
    "two_sample_chi2",
]

BLOCK_SIZE = 1 << 16


class Method(str, enum.Enum):
    BERNOULLI_SCHEME = "bernoulli_scheme"
    GEOMETRIC_WAITS = "geometric_waits"

    @classmethod
    def parse(cls, value) -> "Method":
        if isinstance(value, cls):
            return value
        aliases = {"bernoulli": cls.BERNOULLI_SCHEME, "geometric": cls.GEOMETRIC_WAITS}
        try:
            return aliases.get(value) or cls(value)
        except ValueError:
            raise DomainError(f"unknown simulation method {value!r}") from None


@dataclass(frozen=True)
class SimConfig:
    n: int
    reps: int
    seed: int = 0
    method: Method = Method.BERNOULLI_SCHEME

    def __post_init__(self):
        _check_step(self.n)
        if isinstance(self.reps, bool) or not isinstance(self.reps, int) or self.reps < 1:
            raise DomainError(f"reps must be a positive integer, got {self.reps!r}")
        if not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        object.__setattr__(self, "method", Method.parse(self.method))


@dataclass(frozen=True)
class SimSummary:
    n: int
    reps: int
    seed: int
    method: Method
    counts: dict[int, int] = field(repr=False)
    empirical: dict[int, float]
    mean: float
    variance: float
    stderr_mean: float


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def _bernoulli_block(n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    z = np.zeros(size, dtype=np.int64)
    for _ in range(n):
        u = rng.random(size)
        z += u * (1 + z) < 1.0
    return z


def _geometric_block(n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    elapsed = np.zeros(size, dtype=np.int64)
    successes = np.zeros(size, dtype=np.int64)
    i = 1
    while True:
        elapsed += rng.geometric(1.0 / i, size)
        done_by_n = elapsed <= n
        if not done_by_n.any():
            return successes
        successes += done_by_n
        i += 1


_SAMPLERS = {
    Method.BERNOULLI_SCHEME: _bernoulli_block,
    Method.GEOMETRIC_WAITS: _geometric_block,
}


def _block_counts(cfg: SimConfig, block: int) -> np.ndarray:
    size = min(BLOCK_SIZE, cfg.reps - block * BLOCK_SIZE)
    draws = _SAMPLERS[cfg.method](cfg.n, size, _block_rng(cfg.seed, block))
    return np.bincount(draws, minlength=cfg.n + 1)


def simulate(cfg: SimConfig, workers: int = 1) -> SimSummary:
    """Run ``cfg.reps`` replications and summarize the final states.

    The summary is a deterministic function of ``(n, reps, seed, method)``;
    ``workers`` only changes wall time.
    """
    n_blocks = -(-cfg.reps // BLOCK_SIZE)
    if workers > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_block = list(pool.map(lambda b: _block_counts(cfg, b), range(n_blocks)))
    else:
        per_block = [_block_counts(cfg, b) for b in range(n_blocks)]
    tally = np.sum(per_block, axis=0)

    counts = {k: int(c) for k, c in enumerate(tally) if c}
    reps = cfg.reps
    s1 = sum(k * c for k, c in counts.items())
    s2 = sum(k * k * c for k, c in counts.items())
    mean = Fraction(s1, reps)
    # unbiased sample variance, computed exactly from integer tallies
    variance = (Fraction(s2) - Fraction(s1 * s1, reps)) / (reps - 1) if reps > 1 else Fraction(0)
    return SimSummary(
        n=cfg.n,
        reps=reps,
        seed=cfg.seed,
        method=cfg.method,
        counts=counts,
        empirical={k: c / reps for k, c in counts.items()},
        mean=float(mean),
        variance=float(variance),
        stderr_mean=math.sqrt(float(variance / reps)),
    )


def sample_paths(n: int, reps: int, seed: int = 0) -> np.ndarray:
    """Full trajectories ``(X_0, ..., X_n)`` of the Bernoulli scheme, one row each."""
    _check_step(n)
    rng = _block_rng(seed, 0)
    paths = np.zeros((reps, n + 1), dtype=np.int64)
    for m in range(1, n + 1):
        u = rng.random(reps)
        prev = paths[:, m - 1]
        paths[:, m] = prev + (u * (1 + prev) < 1.0)
    return paths


def expected_trials(k: int) -> int:
    """Mean number of draws needed for ``k`` successes, ``1 + 2 + ... + k``."""
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        raise DomainError(f"k must be an integer >= 1, got {k!r}")
    return k * (k + 1) // 2


def histogram_export(summary: SimSummary, path, exact: bool = True) -> Path:
    """Write ``k,frequency,exact`` rows for the observed support, atomically.

    The exact column holds ``P(X_n = k)`` from the recurrence, left empty
    when ``n`` is past the exact limit or ``exact`` is False.
    """
    path = Path(path)
    row = dist_recurrence(summary.n) if exact and summary.n <= exact_limit() else None
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["k", "frequency", "exact"])
    for k in sorted(summary.empirical):
        writer.writerow([k, repr(summary.empirical[k]), "" if row is None else repr(float(row[k]))])
    directory = path.parent if str(path.parent) else Path(".")
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{path.name}.", suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
        os.replace(tmp, path)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write histogram to {path}: {exc.strerror}") from exc
    return path


def two_sample_chi2(counts_a: dict[int, int], counts_b: dict[int, int], min_expected: float = 5.0):
    """Chi-square homogeneity test between two tallies over the same states.

    Adjacent states are pooled until every cell's expected count reaches
    ``min_expected``. Returns ``(statistic, p_value, dof)``.
    """
    states = sorted(set(counts_a) | set(counts_b))
    na = sum(counts_a.values())
    nb = sum(counts_b.values())
    share_a = na / (na + nb)
    bins: list[list[int]] = []
    cur = [0, 0]
    for k in states:
        cur[0] += counts_a.get(k, 0)
        cur[1] += counts_b.get(k, 0)
        pooled = cur[0] + cur[1]
        if min(pooled * share_a, pooled * (1 - share_a)) >= min_expected:
            bins.append(cur)
            cur = [0, 0]
    if cur != [0, 0]:
        if bins:
            bins[-1][0] += cur[0]
            bins[-1][1] += cur[1]
        else:
            bins.append(cur)
    if len(bins) < 2:
        return 0.0, 1.0, 0
    table = np.array(bins, dtype=float).T
    stat, p, dof, _ = chi2_contingency(table, correction=False)
    return float(stat), float(p), int(dof)
