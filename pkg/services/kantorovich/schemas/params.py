# services/kantorovich/schemas/params.py
from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from settings import get_settings


def parse_rational(value: Union[str, int, float, Fraction]) -> Union[float, Fraction]:
    """Accept 'p/q' strings as exact rationals; everything else stays numeric."""
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            return Fraction(text)
        return float(text)
    return value


class OperatorParams(BaseModel):
    """
    The pair (n, a) of K_n^a.

    `a` keeps an exact Fraction when one is given (or a 'p/q' string), which
    is what the moment engine wants; floats are accepted as-is.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int = Field(..., ge=1, description="Operator index n >= 1")
    a: Union[Fraction, float] = Field(default=0.0, description="Exponential parameter a >= 0")

    @field_validator("a", mode="before")
    @classmethod
    def _parse_a(cls, v):
        return parse_rational(v)

    @field_validator("a")
    @classmethod
    def _a_nonnegative(cls, v):
        if v < 0 or (isinstance(v, float) and not math.isfinite(v)):
            raise ValueError(f"a must be a finite number >= 0, got {v}")
        return v

    @property
    def a_exact(self) -> Fraction:
        return Fraction(self.a)

    @property
    def a_float(self) -> float:
        return float(self.a)

    def label(self) -> str:
        return f"n={self.n}, a={self.a}"


class TruncationPolicy(BaseModel):
    """How far the infinite weight series is followed."""
    model_config = ConfigDict(frozen=True)

    tail_mass_tol: float = Field(
        default_factory=lambda: get_settings().tail_mass_tol,
        gt=0.0,
        lt=1.0,
        description="Certified bound on the dropped weight mass",
    )
    max_terms: Optional[int] = Field(
        default=None,
        ge=1,
        description="Term budget; default max(floor, ceil(10(n+1)(x+1)))",
    )

    def budget(self, n: int, x: float) -> int:
        if self.max_terms is not None:
            return self.max_terms
        return max(get_settings().max_terms_floor, math.ceil(10 * (n + 1) * (x + 1)))
