"""Runtime limits, overridable through the environment."""

import os

from .errors import ResourceLimitError

DEFAULT_EXACT_LIMIT = 500
DEFAULT_SERIES_LIMIT = 120
EXACT_LIMIT_ENV = "BIRTHCHAIN_EXACT_LIMIT"

# decimal digits carried by an IEEE double, log10(2**53)
DOUBLE_DIGITS = 15.954589770191003


def exact_limit() -> int:
    """Largest step index for which exact rational rows are computed."""
    raw = os.environ.get(EXACT_LIMIT_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_EXACT_LIMIT
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{EXACT_LIMIT_ENV} must be an integer, got {raw!r}") from None
    if value < 0:
        raise ValueError(f"{EXACT_LIMIT_ENV} must be nonnegative, got {value}")
    return value


def check_exact_limit(n: int, what: str = "step index", limit: int | None = None) -> None:
    limit = exact_limit() if limit is None else limit
    if n > limit:
        raise ResourceLimitError(
            f"{what} {n} exceeds the exact-arithmetic limit {limit} "
            f"(raise {EXACT_LIMIT_ENV} to extend it)",
            requested=n,
            limit=limit,
        )
