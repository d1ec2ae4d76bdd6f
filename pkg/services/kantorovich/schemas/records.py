# services/kantorovich/schemas/records.py
from __future__ import annotations

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from schemas.analysis import RateFit

# Relative slack allowed before a computed inequality counts as violated
# (both sides carry floating roundoff).
BOUND_RTOL = 1e-9
BOUND_ATOL = 1e-14


class BoundRecord(BaseModel):
    """One estimate check at one (n, a, x): both sides of the inequality."""
    check: str
    function: str
    n: int
    a: float
    x: float
    actual: float
    bound: float
    slack: float
    violated: bool
    details: Dict[str, float] = Field(default_factory=dict)

    @classmethod
    def build(
        cls,
        *,
        check: str,
        function: str,
        n: int,
        a: float,
        x: float,
        actual: float,
        bound: float,
        details: Optional[Dict[str, float]] = None,
    ) -> "BoundRecord":
        violated = actual > bound * (1 + BOUND_RTOL) + BOUND_ATOL
        return cls(
            check=check,
            function=function,
            n=n,
            a=float(a),
            x=float(x),
            actual=float(actual),
            bound=float(bound),
            slack=float(bound - actual),
            violated=bool(violated),
            details={k: float(v) for k, v in (details or {}).items()},
        )

    def to_row(self) -> Dict[str, Any]:
        row = self.model_dump(exclude={"details"})
        row.update(self.details)
        return row


class VoronovskajaRow(BaseModel):
    n: int
    scaled_error: float = Field(..., description="n·(D^r K f - f^(r)) at x")
    limit: float
    abs_diff: float
    derivative_error_estimate: Optional[float] = None


class VoronovskajaRecord(BaseModel):
    function: str
    a: float
    x: float
    r: int
    rows: List[VoronovskajaRow]
    decay: Optional[RateFit] = None

    def to_rows(self) -> List[Dict[str, Any]]:
        base = {"function": self.function, "a": self.a, "x": self.x, "r": self.r}
        return [{**base, **row.model_dump()} for row in self.rows]


class DensityCurve(BaseModel):
    """C1 (Cesaro) density of {k : b_k >= epsilon}, for n = 1..N."""
    epsilon: float = Field(..., gt=0.0)
    density: List[float]
    members: List[int]
    last_member: Optional[int] = None
    threshold: Optional[int] = Field(default=None, description="Index past which no member may occur")

    @property
    def respects_threshold(self) -> bool:
        if self.threshold is None or self.last_member is None:
            return True
        return self.last_member <= self.threshold


class BVRecord(BaseModel):
    function: str
    n: int
    a: float
    x: float
    lam: float
    n0: int
    lhs: float
    bound_skip_k0: float
    bound_k0_double: float
    slack: float
    violated: bool
    terms: Dict[str, float] = Field(default_factory=dict)

    def to_row(self) -> Dict[str, Any]:
        row = self.model_dump(exclude={"terms"})
        row.update(self.terms)
        return row
