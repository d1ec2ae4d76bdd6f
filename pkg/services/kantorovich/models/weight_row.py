# services/kantorovich/models/weight_row.py
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from core.errors import TruncationFailure


@dataclass(frozen=True, eq=False)
class WeightRow:
    """W_{n,k}^a(x) for k = 0..K plus a certified bound on the dropped tail."""
    n: int
    a: float
    x: float
    values: np.ndarray
    tail_mass: float

    def __post_init__(self) -> None:
        self.values.setflags(write=False)

    @property
    def K(self) -> int:
        return len(self.values) - 1

    @property
    def total(self) -> float:
        return math.fsum(self.values)

    def roundoff_allowance(self) -> float:
        return 8.0 * len(self.values) * np.finfo(float).eps

    def validate(self, tol: float) -> None:
        """
        Rules:
        - every value >= 0
        - tail_mass <= tol
        - |sum + tail - 1| <= 2 tol (+ summation roundoff allowance)

        Raises:
            TruncationFailure: if a rule fails
        """
        if np.any(self.values < 0):
            raise TruncationFailure(f"negative weight in row n={self.n}, a={self.a}, x={self.x}")
        if self.tail_mass > tol:
            raise TruncationFailure(
                f"tail mass {self.tail_mass:.3e} exceeds tolerance {tol:.1e} "
                f"(n={self.n}, a={self.a}, x={self.x})"
            )
        defect = abs(self.total + self.tail_mass - 1.0)
        if defect > 2 * tol + self.roundoff_allowance():
            raise TruncationFailure(
                f"partition of unity off by {defect:.3e} (n={self.n}, a={self.a}, x={self.x})"
            )
