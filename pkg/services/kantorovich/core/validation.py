"""
Validation utilities for run parameters.
Ensures sweeps start from consistent inputs and fail with clear messages.
"""
from typing import Iterable, List, Sequence

from core.catalog import Catalog
from core.errors import ConfigError


def validate_n_values(n_values: Sequence[int]) -> List[int]:
    """
    Validate a list of operator indices.

    Rules:
    - at least one value
    - every n is an integer >= 1
    - no duplicates

    Returns:
        The values in ascending order

    Raises:
        ConfigError: if validation fails
    """
    if not n_values:
        raise ConfigError("n list must not be empty")
    seen = set()
    for n in n_values:
        if isinstance(n, bool) or int(n) != n or n < 1:
            raise ConfigError(f"n must be an integer >= 1, got {n}")
        if n in seen:
            raise ConfigError(f"Duplicate n value: {n}")
        seen.add(n)
    return sorted(int(n) for n in n_values)


def validate_a_values(a_values: Sequence[float]) -> List[float]:
    """
    Validate a list of exponential parameters.

    Rules:
    - at least one value
    - every a is finite and >= 0

    Raises:
        ConfigError: if validation fails
    """
    if not a_values:
        raise ConfigError("a list must not be empty")
    for a in a_values:
        if not (a >= 0) or a == float("inf"):
            raise ConfigError(f"a must be a finite number >= 0, got {a}")
    return list(a_values)


def validate_x_values(x_values: Sequence[float], *, positive: bool = False) -> List[float]:
    """
    Validate evaluation points.

    Rules:
    - x >= 0 (x > 0 when `positive`)
    - finite

    Raises:
        ConfigError: if validation fails
    """
    if not x_values:
        raise ConfigError("x list must not be empty")
    for x in x_values:
        if x != x or x == float("inf"):
            raise ConfigError(f"x must be finite, got {x}")
        if positive and x <= 0:
            raise ConfigError(f"x must be > 0 here, got {x}")
        if x < 0:
            raise ConfigError(f"x must be >= 0, got {x}")
    return list(x_values)


def validate_delta(delta: float) -> None:
    if not delta > 0:
        raise ConfigError(f"delta must be > 0, got {delta}")


def ensure_known_functions(catalog: Catalog, ids: Iterable[str]) -> List[str]:
    """
    Ensure every function id exists in the catalog.

    Raises:
        ConfigError: listing all unknown ids at once
    """
    ids = list(ids)
    unknown = [i for i in ids if i not in catalog]
    if unknown:
        raise ConfigError(f"Unknown function ids: {sorted(set(unknown))}; known: {', '.join(catalog.ids())}")
    return ids


def coerce_format(fmt: str) -> str:
    """
    Coerce a report format name.

    Returns:
        "csv", "json" or "xlsx"

    Raises:
        ConfigError: for any other format
    """
    value = (fmt or "csv").lower().strip()
    if value not in ("csv", "json", "xlsx"):
        raise ConfigError(f"format must be csv, json or xlsx, got {fmt!r}")
    return value
