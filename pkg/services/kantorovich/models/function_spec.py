# services/kantorovich/models/function_spec.py
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Mapping, Optional, Tuple

import numpy as np

from core.errors import ConfigError, MissingOneSidedData

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class OneSided:
    """f(b-), f(b+), f'(b-), f'(b+) at a breakpoint b."""
    f_minus: float
    f_plus: float
    df_minus: float
    df_plus: float


@dataclass(frozen=True, eq=False)
class PiecewiseSignal:
    """
    A scalar signal that is monotone between consecutive knots.

    `limits` holds (g(b-), g(b+)) at knots where g jumps; elsewhere the
    one-sided limits equal the value.
    """
    value: ArrayFn
    knots: Optional[Tuple[float, ...]]
    limits: Mapping[float, Tuple[float, float]] = field(default_factory=dict)

    def __call__(self, t):
        return self.value(np.asarray(t, dtype=float))

    def left(self, t: float) -> float:
        if t in self.limits:
            return self.limits[t][0]
        return float(self(t))

    def right(self, t: float) -> float:
        if t in self.limits:
            return self.limits[t][1]
        return float(self(t))


@dataclass(frozen=True, eq=False)
class FunctionSpec:
    """
    A test function f on [0, inf) with the analytic metadata the checks need.

    `derivatives` holds f', f'', f''' where known (None where f' jumps is
    fine: values at breakpoints come from `one_sided`). `fprime_knots` lists
    the points where f' changes monotonicity; None means unknown, which
    makes total-variation requests fail loudly.
    """
    id: str
    value: ArrayFn
    derivatives: Tuple[ArrayFn, ...] = ()
    breakpoints: Tuple[float, ...] = ()
    one_sided: Mapping[float, OneSided] = field(default_factory=dict)
    growth_gamma: float = 0.0
    growth_M: float = 1.0
    fprime_knots: Optional[Tuple[float, ...]] = None
    tv_hint: Optional[Callable[[float, float], float]] = None
    holder_alpha: float = 1.0
    bounded: bool = False
    # sup |f''| when finite (auxiliary-operator bound)
    second_sup: Optional[float] = None
    description: str = ""

    def __call__(self, t):
        return self.value(np.asarray(t, dtype=float))

    # ---------- derivatives / one-sided data ----------

    def derivative(self, order: int) -> ArrayFn:
        if order == 0:
            return self.value
        if order > len(self.derivatives):
            raise MissingOneSidedData(f"{self.id}: derivative of order {order} not in catalog")
        return self.derivatives[order - 1]

    def is_breakpoint(self, x: float) -> bool:
        return any(abs(x - b) <= 1e-12 * max(1.0, abs(b)) for b in self.breakpoints)

    def _sides(self, x: float) -> OneSided:
        for b, data in self.one_sided.items():
            if abs(x - b) <= 1e-12 * max(1.0, abs(b)):
                return data
        raise MissingOneSidedData(f"{self.id}: breakpoint {x} has no one-sided data")

    def value_sides(self, x: float) -> Tuple[float, float]:
        if self.is_breakpoint(x):
            s = self._sides(x)
            return s.f_minus, s.f_plus
        v = float(self(x))
        return v, v

    def fprime_sides(self, x: float) -> Tuple[float, float]:
        """(f'(x-), f'(x+))."""
        if self.is_breakpoint(x):
            s = self._sides(x)
            return s.df_minus, s.df_plus
        v = float(self.derivative(1)(np.asarray(x, dtype=float)))
        return v, v

    def fprime_signal(self) -> PiecewiseSignal:
        knots: Optional[Tuple[float, ...]] = None
        if self.fprime_knots is not None:
            knots = tuple(sorted(set(self.breakpoints) | set(self.fprime_knots)))
        limits: Dict[float, Tuple[float, float]] = {
            b: (s.df_minus, s.df_plus) for b, s in self.one_sided.items()
        }
        return PiecewiseSignal(value=self.derivative(1), knots=knots, limits=limits)

    # ---------- contract checks ----------

    def validate(self, *, t_max: float = 1e3, samples: int = 4001) -> None:
        """
        Sampled check of the catalog contract.

        Rules:
        - f finite on [0, t_max] with |f(t)| <= M(1 + t^gamma)
        - every breakpoint carries one-sided data
        - one-sided values match f just left/right of the breakpoint

        Raises:
            ConfigError: if a rule fails
        """
        t = np.linspace(0.0, t_max, samples)
        v = self(t)
        if not np.all(np.isfinite(v)):
            raise ConfigError(f"{self.id}: non-finite values on [0, {t_max}]")
        envelope = self.growth_M * (1.0 + t ** self.growth_gamma)
        if np.any(np.abs(v) > envelope * (1 + 1e-12)):
            worst = float(t[np.argmax(np.abs(v) - envelope)])
            raise ConfigError(f"{self.id}: growth bound M(1+t^gamma) fails near t={worst}")

        for b in self.breakpoints:
            if b not in self.one_sided:
                raise ConfigError(f"{self.id}: breakpoint {b} lacks one-sided data")
            s = self.one_sided[b]
            h = 1e-7 * max(1.0, b)
            near_points = [(b + h, s.f_plus)] + ([(b - h, s.f_minus)] if b - h >= 0 else [])
            for t0, expected in near_points:
                got = float(self(t0))
                if abs(got - expected) > 1e-5 * max(1.0, abs(expected)):
                    raise ConfigError(
                        f"{self.id}: one-sided value at {b} is {expected}, f({t0}) = {got}"
                    )
