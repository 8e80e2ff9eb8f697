"""Process-wide budgets read from the environment."""

import os

BUDGET_ENV = "GOLDBACH_LAB_BUDGET_MB"
DEFAULT_BUDGET_MB = 2048


def budget_bytes() -> int:
    """Memory budget in bytes, from ``GOLDBACH_LAB_BUDGET_MB`` if set."""
    raw = os.environ.get(BUDGET_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_BUDGET_MB * 2**20
    try:
        mb = float(raw)
    except ValueError:
        mb = DEFAULT_BUDGET_MB
    return int(max(mb, 1.0) * 2**20)


def check_budget(nbytes: int, what: str) -> None:
    from .errors import ResourceError

    limit = budget_bytes()
    if nbytes > limit:
        raise ResourceError(
            f"{what} needs about {nbytes / 2**20:.1f} MB, budget is {limit / 2**20:.1f} MB "
            f"(set {BUDGET_ENV} to raise it)"
        )
