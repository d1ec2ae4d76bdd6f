# services/kantorovich/core/ratcore.py
"""
Exact rational functions of the form p(x) / (1+x)^m.

Coefficients are `fractions.Fraction` (arbitrary-precision rationals, always
reduced). Values are normalized on construction: trailing zeros stripped and
p not divisible by (1+x) while m > 0. The family is closed under the
operations the moment recurrences need: add, sub, mul, d/dx and division by
constants times powers of (1+x).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np

from core.errors import ConfigError, DivisionNotExact, OrderUndefined, PoleError

logger = logging.getLogger(__name__)

Rational = Union[int, Fraction]
Poly = Tuple[Fraction, ...]


# ---------- polynomial helpers (ascending coefficients) ----------

def _strip(p: Sequence[Fraction]) -> Poly:
    end = len(p)
    while end and p[end - 1] == 0:
        end -= 1
    return tuple(p[:end])


def _poly_add(p: Poly, q: Poly) -> Poly:
    if len(p) < len(q):
        p, q = q, p
    out = list(p)
    for i, c in enumerate(q):
        out[i] += c
    return _strip(out)


def _poly_mul(p: Poly, q: Poly) -> Poly:
    if not p or not q:
        return ()
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] += a * b
    return _strip(out)


def _poly_scale(p: Poly, c: Fraction) -> Poly:
    if c == 0:
        return ()
    return tuple(a * c for a in p)


def _poly_derive(p: Poly) -> Poly:
    return _strip([i * p[i] for i in range(1, len(p))])


def _one_plus_x_pow(j: int) -> Poly:
    return tuple(Fraction(math.comb(j, i)) for i in range(j + 1))


def _divide_one_plus_x(p: Poly) -> Tuple[Poly, Fraction]:
    """Synthetic division by (x + 1): p = (1+x)·q + remainder."""
    if not p:
        return (), Fraction(0)
    d = len(p) - 1
    q = [Fraction(0)] * d
    acc = Fraction(0)
    for i in range(d, 0, -1):
        acc = p[i] - acc
        q[i - 1] = acc
    return _strip(q), p[0] - acc


def _normalize(p: Poly, m: int) -> Tuple[Poly, int]:
    p = _strip(p)
    if not p:
        return (), 0
    while m > 0:
        q, rem = _divide_one_plus_x(p)
        if rem != 0:
            break
        p, m = q, m - 1
    return p, m


def _as_fraction(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, float, str)):
        return Fraction(value)
    raise ConfigError(f"cannot use {value!r} as an exact rational")


# ---------- RatFunc ----------

@dataclass(frozen=True)
class RatFunc:
    """p(x) / (1+x)^pole_order with exact coefficients (ascending powers)."""

    coeffs: Poly = ()
    pole_order: int = 0

    def __post_init__(self) -> None:
        if self.pole_order < 0:
            raise ConfigError(f"pole_order must be >= 0, got {self.pole_order}")
        p, m = _normalize(tuple(_as_fraction(c) for c in self.coeffs), self.pole_order)
        object.__setattr__(self, "coeffs", p)
        object.__setattr__(self, "pole_order", m)

    # ----- constructors -----

    @classmethod
    def const(cls, c: Any) -> "RatFunc":
        return cls((_as_fraction(c),), 0)

    @classmethod
    def x(cls) -> "RatFunc":
        return cls((Fraction(0), Fraction(1)), 0)

    @classmethod
    def inv_one_plus_x(cls, power: int = 1) -> "RatFunc":
        return cls((Fraction(1),), power)

    # ----- properties -----

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @cached_property
    def _float_coeffs(self) -> Tuple[float, ...]:
        return tuple(float(c) for c in self.coeffs)

    # ----- arithmetic -----

    def _lift(self, m: int) -> Poly:
        return _poly_mul(self.coeffs, _one_plus_x_pow(m - self.pole_order))

    def __add__(self, other: Any) -> "RatFunc":
        other = _coerce(other)
        m = max(self.pole_order, other.pole_order)
        return RatFunc(_poly_add(self._lift(m), other._lift(m)), m)

    __radd__ = __add__

    def __neg__(self) -> "RatFunc":
        return RatFunc(_poly_scale(self.coeffs, Fraction(-1)), self.pole_order)

    def __sub__(self, other: Any) -> "RatFunc":
        return self + (-_coerce(other))

    def __rsub__(self, other: Any) -> "RatFunc":
        return _coerce(other) - self

    def __mul__(self, other: Any) -> "RatFunc":
        other = _coerce(other)
        return RatFunc(_poly_mul(self.coeffs, other.coeffs), self.pole_order + other.pole_order)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "RatFunc":
        if isinstance(other, RatFunc):
            return exact_divide(self, other)
        c = _as_fraction(other)
        if c == 0:
            raise ZeroDivisionError("RatFunc divided by zero")
        return RatFunc(_poly_scale(self.coeffs, 1 / c), self.pole_order)

    def __pow__(self, k: int) -> "RatFunc":
        out = RatFunc.const(1)
        for _ in range(k):
            out = out * self
        return out

    # ----- serialization -----

    def to_json(self) -> Dict[str, Any]:
        return {
            "num": [f"{c.numerator}/{c.denominator}" for c in self.coeffs],
            "pole_order": self.pole_order,
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "RatFunc":
        return cls(tuple(Fraction(s) for s in data["num"]), int(data["pole_order"]))

    def __str__(self) -> str:
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            terms.append(f"{c}" if not mono else f"{c}*{mono}")
        num = " + ".join(terms) or "0"
        if self.pole_order == 0:
            return num
        return f"({num})/(1+x)^{self.pole_order}"


def _coerce(value: Any) -> RatFunc:
    if isinstance(value, RatFunc):
        return value
    return RatFunc.const(value)


def normalize(f: RatFunc) -> RatFunc:
    """Re-run normalization (construction already normalizes, so this is idempotent)."""
    return RatFunc(f.coeffs, f.pole_order)


def exact_divide(f: RatFunc, g: RatFunc) -> RatFunc:
    """
    f / g, allowed only when g = c·(1+x)^j / (1+x)^m.

    Raises:
        DivisionNotExact: g's numerator has a factor other than (1+x).
    """
    if g.is_zero:
        raise ZeroDivisionError("RatFunc divided by zero")
    p, j = g.coeffs, 0
    while len(p) > 1:
        q, rem = _divide_one_plus_x(p)
        if rem != 0:
            raise DivisionNotExact(f"division by {g} leaves the p(x)/(1+x)^m family")
        p, j = q, j + 1
    c = p[0]
    m = f.pole_order + j - g.pole_order
    num = _poly_scale(f.coeffs, 1 / c)
    if m < 0:
        num, m = _poly_mul(num, _one_plus_x_pow(-m)), 0
    return RatFunc(num, m)


# ---------- Public API ----------

def rf_arith(lhs: RatFunc, rhs: RatFunc, op: str) -> RatFunc:
    if op == "add":
        return lhs + rhs
    if op == "sub":
        return lhs - rhs
    if op == "mul":
        return lhs * rhs
    raise ConfigError(f"unknown RatFunc operation {op!r} (expected add, sub or mul)")


def rf_derive(f: RatFunc) -> RatFunc:
    """d/dx [p/(1+x)^m] = [p'·(1+x) - m·p] / (1+x)^(m+1)."""
    p, m = f.coeffs, f.pole_order
    if m == 0:
        return RatFunc(_poly_derive(p), 0)
    num = _poly_add(
        _poly_mul(_poly_derive(p), _one_plus_x_pow(1)),
        _poly_scale(p, Fraction(-m)),
    )
    return RatFunc(num, m + 1)


def rf_eval(f: RatFunc, x: Any) -> Any:
    """
    Evaluate f at x.

    int / Fraction x gives an exact Fraction; float or numpy input goes
    through Horner in double precision.

    Raises:
        PoleError: x == -1 while f still has a pole there.
    """
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        xq = Fraction(x)
        if f.pole_order > 0 and xq == -1:
            raise PoleError(f"{f} has a pole at x = -1")
        acc = Fraction(0)
        for c in reversed(f.coeffs):
            acc = acc * xq + c
        return acc / (1 + xq) ** f.pole_order

    arr = np.asarray(x, dtype=float)
    if f.pole_order > 0 and np.any(arr == -1.0):
        raise PoleError(f"{f} has a pole at x = -1")
    acc = np.zeros_like(arr)
    for c in reversed(f._float_coeffs):
        acc = acc * arr + c
    out = acc / (1.0 + arr) ** f.pole_order
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class LeadingOrder:
    exponent: float
    exponents: Tuple[float, ...] = field(default_factory=tuple)
    ratios: Tuple[float, ...] = field(default_factory=tuple)
    n_values: Tuple[int, ...] = field(default_factory=tuple)


def rf_leading_order(f_seq: Sequence[Tuple[int, RatFunc]], x0: float) -> LeadingOrder:
    """
    Estimate s in |f_n(x0)| ~ C·n^(-s) from successive ratios.

    The sequence should be geometric in n (n, 2n, 4n, ...); the estimate is
    the exponent from the last (most asymptotic) ratio. Values are evaluated
    exactly at the rational image of x0, so no cancellation enters.

    Raises:
        ConfigError: fewer than 3 points or x0 <= 0
        OrderUndefined: some f_n(x0) == 0
    """
    if len(f_seq) < 3:
        raise ConfigError(f"ratio test needs >= 3 values of n, got {len(f_seq)}")
    if x0 <= 0:
        raise ConfigError(f"x0 must be > 0, got {x0}")
    pts = sorted(f_seq, key=lambda item: item[0])
    xq = Fraction(x0)
    values: List[Fraction] = []
    for n, f in pts:
        v = abs(rf_eval(f, xq))
        if v == 0:
            raise OrderUndefined(f"value vanishes at n={n}, x0={x0}; order undefined")
        values.append(v)

    ratios: List[float] = []
    exponents: List[float] = []
    for (n1, _), (n2, _), v1, v2 in zip(pts, pts[1:], values, values[1:]):
        ratio = v1 / v2
        ratios.append(float(ratio))
        exponents.append(math.log(ratio) / math.log(n2 / n1))

    logger.debug(f"ratio test at x0={x0}: exponents={exponents}")
    return LeadingOrder(
        exponent=exponents[-1],
        exponents=tuple(exponents),
        ratios=tuple(ratios),
        n_values=tuple(n for n, _ in pts),
    )
