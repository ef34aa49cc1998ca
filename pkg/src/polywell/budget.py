"""Enumeration budgets.

Combinatorial routines accept an explicit budget; when none is given they fall
back to the defaults below, which the ``POLYWELL_BUDGET`` environment variable
can override.  The variable holds either a single integer (applied to every
bound) or a comma separated ``name=value`` list, e.g. ``faces=1000,pieces=64``.
"""

from __future__ import annotations

import os

DEFAULTS = {
    "faces": 50_000,
    "pieces": 50_000,
    "vertices": 50_000,
    "supports": 1_000_000,
}

ENV_VAR = "POLYWELL_BUDGET"


class BudgetExceeded(RuntimeError):
    """Raised when an enumeration would exceed its configured bound."""

    def __init__(self, bound: str, limit: int):
        super().__init__(f"budget exceeded: {bound} > {limit}")
        self.bound = bound
        self.limit = limit


def _overrides() -> dict[str, int]:
    raw = os.environ.get(ENV_VAR, "").strip()
    if not raw:
        return {}
    if "=" not in raw:
        value = int(raw)
        return {k: value for k in DEFAULTS}
    out = {}
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        key, _, value = part.partition("=")
        out[key.strip()] = int(value)
    return out


def limit(bound: str, explicit: int | None = None) -> int:
    """Effective limit for ``bound``; an explicit value wins over everything."""
    if explicit is not None:
        return explicit
    return _overrides().get(bound, DEFAULTS[bound])


def check(bound: str, count: int, explicit: int | None = None) -> None:
    lim = limit(bound, explicit)
    if count > lim:
        raise BudgetExceeded(bound, lim)
