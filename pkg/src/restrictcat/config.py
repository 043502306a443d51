"""Thresholds for exhaustive checks. The environment variable
``RESTRICTCAT_EXHAUSTIVE_LIMIT`` overrides the morphism-count cap."""

import os

DEFAULT_EXHAUSTIVE_LIMIT = 200
FAMILY_ALL_SUBSETS_MAX_HOM = 12
FAMILY_MAX_SIZE = 3
RANGE_ENUMERATION_LIMIT = 20


def exhaustive_limit() -> int:
    raw = os.environ.get("RESTRICTCAT_EXHAUSTIVE_LIMIT")
    if raw is None or raw.strip() == "":
        return DEFAULT_EXHAUSTIVE_LIMIT
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"RESTRICTCAT_EXHAUSTIVE_LIMIT must be an integer, got {raw!r}") from exc
    return max(value, 0)
