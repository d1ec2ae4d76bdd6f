# services/kantorovich/schemas/analysis.py
from __future__ import annotations

from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from settings import get_settings


class GridSpec(BaseModel):
    """Evaluation grid in x."""
    model_config = ConfigDict(frozen=True)

    x_min: float = Field(..., ge=0.0)
    x_max: float
    points: int = Field(..., ge=2)
    spacing: Literal["uniform", "log"] = "uniform"

    @model_validator(mode="after")
    def _ordered(self):
        if self.x_max <= self.x_min:
            raise ValueError(f"x_max ({self.x_max}) must exceed x_min ({self.x_min})")
        if self.spacing == "log" and self.x_min <= 0:
            raise ValueError("log spacing needs x_min > 0")
        return self

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """'x_min:x_max:points' with an optional ':log' suffix."""
        parts = [p.strip() for p in text.split(":")]
        if len(parts) not in (3, 4):
            raise ValueError(f"grid must look like 'x_min:x_max:points[:log]', got {text!r}")
        spacing = parts[3] if len(parts) == 4 else "uniform"
        return cls(x_min=float(parts[0]), x_max=float(parts[1]), points=int(parts[2]), spacing=spacing)

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.x_min, self.x_max, self.points)
        return np.linspace(self.x_min, self.x_max, self.points)

    def step(self) -> float:
        return (self.x_max - self.x_min) / (self.points - 1)


class WeightedNormSpec(BaseModel):
    """rho(x) = 1 + x^rho_exponent; sups are truncated at x_max_trunc."""
    model_config = ConfigDict(frozen=True)

    rho_exponent: float = Field(default=2.0, ge=2.0)
    x_max_trunc: float = Field(default_factory=lambda: get_settings().x_max_trunc, gt=0.0)
    points: int = Field(default=2001, ge=3)

    def rho(self, x):
        return 1.0 + np.asarray(x, dtype=float) ** self.rho_exponent


class ModulusReport(BaseModel):
    delta: float = Field(..., gt=0.0)
    omega: Optional[float] = Field(default=None, ge=0.0, description="First-order modulus")
    omega2: Optional[float] = Field(default=None, ge=0.0, description="Second-order modulus")
    omega_weighted: Optional[float] = Field(default=None, ge=0.0, description="Weighted modulus")


class RateFit(BaseModel):
    """log e_n = log C - s log n, least squares."""
    exponent: float
    constant: float
    residual: float = Field(..., ge=0.0, description="Max log-space deviation")
    points: int = Field(..., ge=3)


class BVBoundParams(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    lambda_: float = Field(default_factory=lambda: get_settings().bv_lambda, gt=1.0, alias="lambda")
    n: int = Field(..., ge=1)
    x: float = Field(..., gt=0.0)
