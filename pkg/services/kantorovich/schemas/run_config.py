# services/kantorovich/schemas/run_config.py
from __future__ import annotations

import math
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_validator

from core.errors import ConfigError
from schemas.analysis import GridSpec
from schemas.params import TruncationPolicy, parse_rational
from settings import get_settings


class RunConfig(BaseModel):
    """
    Effective parameters of one CLI run (command defaults < config file < flags).

    Function ids are checked against the catalog passed in the validation
    context: RunConfig.model_validate(data, context={"catalog": catalog}).
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    command: str
    functions: List[str] = Field(default_factory=list)
    n_values: List[int] = Field(default_factory=list)
    a_values: List[Union[Fraction, float]] = Field(default_factory=lambda: [0.0])
    x_values: List[float] = Field(default_factory=list)
    grid: Optional[GridSpec] = None
    tail_tol: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    format: str = "csv"
    out: Optional[str] = None
    options: Dict[str, str] = Field(default_factory=dict)

    @field_validator("n_values")
    @classmethod
    def _positive_n(cls, v: List[int]) -> List[int]:
        for n in v:
            if n < 1:
                raise ValueError(f"n must be >= 1, got {n}")
        if len(set(v)) != len(v):
            raise ValueError(f"duplicate n values in {v}")
        return v

    @field_validator("a_values", mode="before")
    @classmethod
    def _parse_a(cls, v):
        return [parse_rational(item) for item in v]

    @field_validator("a_values")
    @classmethod
    def _a_nonnegative(cls, v):
        for a in v:
            if a < 0 or (isinstance(a, float) and not math.isfinite(a)):
                raise ValueError(f"a must be a finite number >= 0, got {a}")
        return v

    @field_validator("x_values")
    @classmethod
    def _x_nonnegative(cls, v: List[float]) -> List[float]:
        for x in v:
            if not math.isfinite(x) or x < 0:
                raise ValueError(f"x must be a finite number >= 0, got {x}")
        return v

    @field_validator("functions")
    @classmethod
    def _known_functions(cls, v: List[str], info: ValidationInfo) -> List[str]:
        catalog = (info.context or {}).get("catalog")
        if catalog is not None:
            unknown = [i for i in v if i not in catalog]
            if unknown:
                raise ValueError(f"unknown function ids {unknown}; known: {', '.join(catalog.ids())}")
        return v

    @field_validator("format")
    @classmethod
    def _format(cls, v: str) -> str:
        v = v.lower().strip()
        if v not in ("csv", "json", "xlsx"):
            raise ValueError(f"format must be csv, json or xlsx, got {v!r}")
        return v

    # ---------- accessors ----------

    def policy(self) -> TruncationPolicy:
        if self.tail_tol is None:
            return TruncationPolicy()
        return TruncationPolicy(tail_mass_tol=self.tail_tol)

    def xs(self) -> List[float]:
        """Grid points when a grid is set, else the explicit x list."""
        if self.grid is not None:
            return [float(x) for x in self.grid.values()]
        return list(self.x_values)

    def option(self, key: str, default: Any = None, cast: Callable[[str], Any] = str) -> Any:
        raw = self.options.get(key)
        if raw is None or raw == "":
            return default
        try:
            return cast(raw)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"option {key}={raw!r}: {e}")

    def output_path(self, extension: str) -> Path:
        """`out` as a file when it has a suffix, otherwise as a directory."""
        target = Path(self.out) if self.out else Path(get_settings().output_dir)
        if target.suffix:
            return target
        return target / f"{self.command}.{extension}"

    def describe(self) -> Dict[str, Any]:
        """Config echo stored in reports (no paths, so reports compare across machines)."""
        out: Dict[str, Any] = {
            "functions": list(self.functions),
            "n": list(self.n_values),
            "a": [str(a) for a in self.a_values],
            "x": self.xs(),
            "tail_tol": self.policy().tail_mass_tol,
        }
        out.update(dict(sorted(self.options.items())))
        return out
