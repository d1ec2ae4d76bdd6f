# services/kantorovich/core/catalog.py
"""
Built-in test functions with their analytic metadata, plus the factories
used for user-declared entries (see core/config_file.py).
"""
from __future__ import annotations

import logging
import math
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from core.errors import ConfigError
from models.function_spec import FunctionSpec, OneSided

logger = logging.getLogger(__name__)


def _monotone_tv(fprime):
    """TV of a monotone f' on [c, d]."""
    return lambda c, d: abs(float(fprime(np.asarray(d))) - float(fprime(np.asarray(c))))


# ---------- factories ----------

def monomial(r: int) -> FunctionSpec:
    if not 0 <= r <= 6:
        raise ConfigError(f"catalog monomials cover t^0..t^6, got r={r}")

    def power(k: int):
        coef = math.perm(r, k)
        if k > r:
            return lambda t: np.zeros_like(np.asarray(t, dtype=float))
        return lambda t: coef * np.asarray(t, dtype=float) ** (r - k)

    ident = {0: "one", 1: "t"}.get(r, f"t{r}")
    return FunctionSpec(
        id=ident,
        value=power(0),
        derivatives=(power(1), power(2), power(3), power(4), power(5)),
        growth_gamma=float(r),
        growth_M=1.0,
        fprime_knots=(),
        tv_hint=_monotone_tv(power(1)),
        bounded=(r == 0),
        second_sup=0.0 if r <= 1 else None,
        description=f"t^{r}",
    )


def piecewise_linear(
    ident: str,
    points: Sequence[Tuple[float, float]],
    tail_slope: float = 0.0,
    description: str = "",
) -> FunctionSpec:
    """
    Continuous piecewise-linear f through `points` (first abscissa 0),
    extended with `tail_slope` past the last point.
    """
    pts = sorted((float(t), float(v)) for t, v in points)
    if len(pts) < 2 or pts[0][0] != 0.0:
        raise ConfigError(f"{ident}: need >= 2 points starting at t = 0")
    ts = np.array([p[0] for p in pts])
    vs = np.array([p[1] for p in pts])
    if np.any(np.diff(ts) <= 0):
        raise ConfigError(f"{ident}: abscissae must be strictly increasing")
    slopes = list(np.diff(vs) / np.diff(ts)) + [float(tail_slope)]

    def value(t):
        t = np.asarray(t, dtype=float)
        inside = np.interp(t, ts, vs)
        return np.where(t > ts[-1], vs[-1] + tail_slope * (t - ts[-1]), inside)

    def slope(t):
        t = np.asarray(t, dtype=float)
        idx = np.clip(np.searchsorted(ts, t, side="right") - 1, 0, len(slopes) - 1)
        return np.asarray(slopes)[idx]

    def zero(t):
        return np.zeros_like(np.asarray(t, dtype=float))

    breaks = tuple(float(t) for t in ts[1:])
    one_sided: Dict[float, OneSided] = {}
    jumps: List[Tuple[float, float]] = []
    for i, b in enumerate(breaks):
        left, right = float(slopes[i]), float(slopes[i + 1])
        one_sided[b] = OneSided(f_minus=float(vs[i + 1]), f_plus=float(vs[i + 1]), df_minus=left, df_plus=right)
        jumps.append((b, abs(right - left)))
    # drop kinks where the slope does not change
    kinks = tuple(b for b, h in jumps if h > 0)
    one_sided = {b: s for b, s in one_sided.items() if b in kinks}

    def tv_hint(c: float, d: float) -> float:
        return math.fsum(h for b, h in jumps if c < b < d)

    M = max(abs(float(vs[0])), max(abs(s) for s in slopes), 1e-300)
    return FunctionSpec(
        id=ident,
        value=value,
        derivatives=(slope, zero, zero),
        breakpoints=kinks,
        one_sided=one_sided,
        growth_gamma=1.0,
        growth_M=M,
        fprime_knots=(),
        tv_hint=tv_hint,
        holder_alpha=1.0,
        description=description or f"piecewise linear through {len(pts)} points",
    )


def abs_shift(c: float, ident: Optional[str] = None) -> FunctionSpec:
    """|t - c| for c > 0."""
    if c <= 0:
        raise ConfigError(f"kink position must be > 0, got {c}")
    return piecewise_linear(
        ident or f"abs_{c:g}",
        [(0.0, c), (c, 0.0)],
        tail_slope=1.0,
        description=f"|t - {c:g}|",
    )


def shifted_linear(x0: float) -> FunctionSpec:
    """t - x0 for a fixed x0 (the auxiliary operator annihilates it)."""
    one = lambda t: np.ones_like(np.asarray(t, dtype=float))
    zero = lambda t: np.zeros_like(np.asarray(t, dtype=float))
    return FunctionSpec(
        id=f"t_minus_{x0:g}",
        value=lambda t: np.asarray(t, dtype=float) - x0,
        derivatives=(one, zero, zero),
        growth_gamma=1.0,
        growth_M=max(1.0, abs(x0)),
        fprime_knots=(),
        tv_hint=lambda c, d: 0.0,
        second_sup=0.0,
        description=f"t - {x0:g}",
    )


def _quiet(fn):
    def wrapped(t):
        with np.errstate(divide="ignore", invalid="ignore"):
            return fn(np.asarray(t, dtype=float))
    return wrapped


def _builtin() -> Dict[str, FunctionSpec]:
    specs: List[FunctionSpec] = [monomial(r) for r in range(7)]

    specs.append(FunctionSpec(
        id="exp_neg",
        value=lambda t: np.exp(-np.asarray(t, dtype=float)),
        derivatives=(
            lambda t: -np.exp(-np.asarray(t, dtype=float)),
            lambda t: np.exp(-np.asarray(t, dtype=float)),
            lambda t: -np.exp(-np.asarray(t, dtype=float)),
        ),
        growth_gamma=0.0,
        growth_M=1.0,
        fprime_knots=(),
        tv_hint=lambda c, d: math.exp(-c) - math.exp(-d),
        bounded=True,
        second_sup=1.0,
        description="e^{-t}",
    ))

    sin_knots = tuple(k * math.pi for k in range(1, 320))
    specs.append(FunctionSpec(
        id="sin",
        value=lambda t: np.sin(np.asarray(t, dtype=float)),
        derivatives=(
            lambda t: np.cos(np.asarray(t, dtype=float)),
            lambda t: -np.sin(np.asarray(t, dtype=float)),
            lambda t: -np.cos(np.asarray(t, dtype=float)),
        ),
        growth_gamma=0.0,
        growth_M=1.0,
        fprime_knots=sin_knots,
        bounded=True,
        second_sup=1.0,
        description="sin t",
    ))

    specs.append(FunctionSpec(
        id="sqrt",
        value=lambda t: np.sqrt(np.asarray(t, dtype=float)),
        derivatives=(
            _quiet(lambda t: 0.5 / np.sqrt(t)),
            _quiet(lambda t: -0.25 * t ** -1.5),
            _quiet(lambda t: 0.375 * t ** -2.5),
        ),
        growth_gamma=0.5,
        growth_M=1.0,
        fprime_knots=(),
        holder_alpha=0.5,
        description="sqrt(t)",
    ))

    specs.append(abs_shift(1.0, "abs_kink"))

    specs.append(piecewise_linear(
        "multikink",
        [(0.0, 0.0), (0.5, 0.5), (1.5, -0.5), (3.0, 0.25)],
        tail_slope=0.0,
        description="piecewise linear, kinks at 0.5, 1.5, 3",
    ))

    specs.append(FunctionSpec(
        id="inv1p",
        value=lambda t: 1.0 / (1.0 + np.asarray(t, dtype=float)),
        derivatives=(
            lambda t: -1.0 / (1.0 + np.asarray(t, dtype=float)) ** 2,
            lambda t: 2.0 / (1.0 + np.asarray(t, dtype=float)) ** 3,
            lambda t: -6.0 / (1.0 + np.asarray(t, dtype=float)) ** 4,
        ),
        growth_gamma=0.0,
        growth_M=1.0,
        fprime_knots=(),
        tv_hint=lambda c, d: 1.0 / (1.0 + c) ** 2 - 1.0 / (1.0 + d) ** 2,
        bounded=True,
        second_sup=2.0,
        description="1/(1+t)",
    ))
    return {spec.id: spec for spec in specs}


BUILTIN: Mapping[str, FunctionSpec] = _builtin()

# Functions whose derivative has bounded variation on finite intervals
BV_CATALOG = ("abs_kink", "multikink", "t")


class Catalog:
    """Built-in functions plus user declarations; user ids may not shadow built-ins."""

    def __init__(self, extra: Iterable[FunctionSpec] = ()):
        self._specs: Dict[str, FunctionSpec] = dict(BUILTIN)
        for spec in extra:
            self.add(spec)

    def add(self, spec: FunctionSpec) -> None:
        if spec.id in self._specs:
            raise ConfigError(f"function id {spec.id!r} already defined")
        spec.validate()
        self._specs[spec.id] = spec
        logger.info(f"✓ registered user function {spec.id}")

    def get(self, ident: str) -> FunctionSpec:
        try:
            return self._specs[ident]
        except KeyError:
            raise ConfigError(f"unknown function id {ident!r}; known: {', '.join(sorted(self._specs))}")

    def __contains__(self, ident: str) -> bool:
        return ident in self._specs

    def ids(self) -> List[str]:
        return sorted(self._specs)


def get_function(ident: str) -> FunctionSpec:
    return Catalog().get(ident)


def monomial_power(ident: str) -> Optional[int]:
    """r for the catalog monomial t^r, None for anything else."""
    if ident == "one":
        return 0
    if ident == "t":
        return 1
    if ident.startswith("t") and ident[1:].isdigit() and 2 <= int(ident[1:]) <= 6:
        return int(ident[1:])
    return None
