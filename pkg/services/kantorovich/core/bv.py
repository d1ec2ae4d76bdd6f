# services/kantorovich/core/bv.py
"""
Rate of convergence for functions whose derivative has bounded variation.

For f with one-sided derivatives at x the estimate reads

  |K f - f| <= |b|/(n+1) · |f'(x+)+f'(x-)|/2
             + sqrt(lam x(1+x)/(n+1)) · |f'(x+)-f'(x-)|/2
             + lam(1+x)/(n+1) · sum_{k=1}^{[sqrt n]} V[x - x/k, x](f_x')
             + x/sqrt(n) · V[x - x/sqrt(n), x](f_x')
             + lam(1+x)/(n+1) · sum_{k=?}^{[sqrt n]} V[x, x + x/k](f_x')
             + x/sqrt(n) · V[x, x + x/sqrt(n)](f_x')

valid once u_2(x) <= lam x(1+x)/(n+1). The right-hand sum is printed
starting at k = 0, where x/k is undefined; both readings are reported:
`skip_k0` drops that term, `k0_double` evaluates it over [x, 2x].
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import ConfigError, NumericalError, RemarkNotYetValid, UnknownMonotonicity
from core.moments import first_moment_shift, kantorovich_central_sym
from core.operators import kantorovich_eval, kernel_cdf, kernel_survival
from core.ratcore import rf_eval
from core.sweeps import ordered_map
from models.function_spec import FunctionSpec, PiecewiseSignal
from schemas.analysis import BVBoundParams
from schemas.params import OperatorParams, TruncationPolicy
from schemas.records import BOUND_ATOL, BOUND_RTOL, BoundRecord, BVRecord

logger = logging.getLogger(__name__)

REFINEMENT_POINTS = 2001
HINT_SLACK = 1e-9


# ---------- total variation ----------

def _refinement_sum(g: PiecewiseSignal, c: float, d: float) -> float:
    ts = np.linspace(c, d, REFINEMENT_POINTS)
    vals = np.asarray(g(ts), dtype=float)
    vals[0], vals[-1] = g.right(c), g.left(d)
    return math.fsum(np.abs(np.diff(vals)))


def total_variation(
    g: PiecewiseSignal,
    c: float,
    d: float,
    tv_hint: Optional[Callable[[float, float], float]] = None,
) -> float:
    """
    Variation of g on [c, d] from its interior one-sided limits g(c+), g(d-).

    Rules:
    - with a hint, the hint is the value and a refinement sum over a uniform
      partition must not exceed it by more than HINT_SLACK
    - otherwise the monotone pieces between knots are summed exactly, plus
      the jump heights at interior knots

    Raises:
        UnknownMonotonicity: neither knots nor a hint are available
        NumericalError: the refinement sum exceeds the hint
    """
    if d < c:
        raise ConfigError(f"variation interval needs c <= d, got [{c}, {d}]")
    if d == c:
        return 0.0

    if tv_hint is not None:
        value = float(tv_hint(c, d))
        refined = _refinement_sum(g, c, d)
        if refined > value + HINT_SLACK:
            raise NumericalError(f"variation hint {value:.12g} below refinement sum {refined:.12g} on [{c}, {d}]")
        return value

    if g.knots is None:
        raise UnknownMonotonicity(f"no monotonicity knots for variation on [{c}, {d}]")
    inner = [b for b in g.knots if c < b < d]
    pts = [c, *inner, d]
    parts = []
    for p, q in zip(pts, pts[1:]):
        parts.append(abs(g.left(q) - g.right(p)))
    for b in inner:
        parts.append(abs(g.right(b) - g.left(b)))
    return math.fsum(parts)


# ---------- f_x ----------

@dataclass(frozen=True, eq=False)
class FxSignal:
    """
    f_x(t) = f(t) - f(x-) for t < x, 0 at x, f(t) - f(x+) for t > x, with
    f'(x+), f'(x-) and the derivative signal f_x' used by the variation terms.
    """
    base: FunctionSpec
    x: float
    fprime_plus: float
    fprime_minus: float

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        f_minus, f_plus = self.base.value_sides(self.x)
        ft = self.base(t)
        return np.where(t < self.x, ft - f_minus, np.where(t > self.x, ft - f_plus, 0.0))

    def derivative_signal(self) -> PiecewiseSignal:
        base = self.base.fprime_signal()
        x, dm, dp = self.x, self.fprime_minus, self.fprime_plus

        def value(t):
            t = np.asarray(t, dtype=float)
            ft = base(t)
            return np.where(t < x, ft - dm, np.where(t > x, ft - dp, 0.0))

        knots = None if base.knots is None else tuple(sorted(set(base.knots) | {x}))
        limits: Dict[float, Tuple[float, float]] = {}
        for b, (lo, hi) in base.limits.items():
            shift = dm if b < x else dp
            limits[b] = (lo - shift, hi - shift)
        limits[x] = (0.0, 0.0)
        return PiecewiseSignal(value=value, knots=knots, limits=limits)

    def continuity_defect(self, samples: int = 201, span: float = 1e-7) -> float:
        """Largest |f_x(t+) - f_x(t-)| across sampled points away from x (0 for continuous f)."""
        t = np.linspace(0.0, 2 * self.x, samples)
        t = t[np.abs(t - self.x) > 2 * span]
        t = t[t > span]
        return float(np.max(np.abs(self(t + span) - self(t - span)))) if len(t) else 0.0


def build_fx(f: FunctionSpec, x: float) -> FxSignal:
    """
    Raises:
        MissingOneSidedData: x is a breakpoint without one-sided derivatives
    """
    if x <= 0:
        raise ConfigError(f"x must be > 0, got {x}")
    minus, plus = f.fprime_sides(x)
    return FxSignal(base=f, x=float(x), fprime_plus=float(plus), fprime_minus=float(minus))


# ---------- validity threshold ----------

def remark_threshold(a, x: float, lam: float) -> int:
    """
    Smallest n0 >= 1 with u_{n,2}(x) <= lam x(1+x)/(n+1) for every n >= n0.

    (n+1)^2 u_{n,2} = n x(1+x) + c with c independent of n, so the
    condition is linear in n; c is read off the exact n = 1 table.
    """
    if lam <= 1:
        raise ConfigError(f"lambda must be > 1, got {lam}")
    xq = Fraction(x)
    s = xq * (1 + xq)
    u2_at_1 = rf_eval(kantorovich_central_sym(2, OperatorParams(n=1, a=a))[2], xq)
    c = 4 * u2_at_1 - s
    lamq = Fraction(lam)
    need = (c - lamq * s) / ((lamq - 1) * s)
    return max(1, math.ceil(need))


def _ensure_remark(params: OperatorParams, x: float, lam: float) -> int:
    n0 = remark_threshold(params.a, x, lam)
    if params.n < n0:
        raise RemarkNotYetValid(
            f"u_2 <= {lam}·x(1+x)/(n+1) fails at n={params.n}, x={x}; valid from n0={n0}",
            n0=n0,
        )
    return n0


# ---------- the estimate ----------

@dataclass(frozen=True)
class BVBound:
    n0: int
    terms: Dict[str, float]

    @property
    def skip_k0(self) -> float:
        return math.fsum(v for k, v in self.terms.items() if k != "right_k0")

    @property
    def k0_double(self) -> float:
        return math.fsum(self.terms.values())


def _check_params(params: OperatorParams, bp: BVBoundParams) -> None:
    if bp.n != params.n:
        raise ConfigError(f"BV parameters are for n={bp.n}, operator has n={params.n}")


def bv_bound(f: FunctionSpec, params: OperatorParams, bp: BVBoundParams) -> BVBound:
    """
    Every term of the estimate at (n, x, lambda).

    Raises:
        RemarkNotYetValid: n below the validity threshold n0
    """
    _check_params(params, bp)
    n, x, lam = params.n, bp.x, bp.lambda_
    n0 = _ensure_remark(params, x, lam)
    fx = build_fx(f, x)
    g = fx.derivative_signal()

    def var(c: float, d: float) -> float:
        return total_variation(g, c, d, f.tv_hint)

    b = rf_eval(first_moment_shift(params), float(x))
    root_n = math.sqrt(n)
    K = math.isqrt(n)
    weight = lam * (1 + x) / (n + 1)
    terms = {
        "mean": abs(b) / (n + 1) * abs(fx.fprime_plus + fx.fprime_minus) / 2,
        "jump": math.sqrt(lam * x * (1 + x) / (n + 1)) * abs(fx.fprime_plus - fx.fprime_minus) / 2,
        "left_sum": weight * math.fsum(var(x - x / k, x) for k in range(1, K + 1)),
        "left_tail": x / root_n * var(x - x / root_n, x),
        "right_sum": weight * math.fsum(var(x, x + x / k) for k in range(1, K + 1)),
        "right_k0": weight * var(x, 2 * x),
        "right_tail": x / root_n * var(x, x + x / root_n),
    }
    return BVBound(n0=n0, terms=terms)


def bv_check(
    f: FunctionSpec,
    params: OperatorParams,
    bp: BVBoundParams,
    policy: Optional[TruncationPolicy] = None,
) -> BVRecord:
    """|K f - f| against both readings of the estimate; violated means above the smaller one."""
    bound = bv_bound(f, params, bp)
    lhs = abs(kantorovich_eval(f, params, bp.x, policy) - float(f(bp.x)))
    tight = bound.skip_k0
    violated = lhs > tight * (1 + BOUND_RTOL) + BOUND_ATOL
    if violated:
        logger.warning(f"✗ BV estimate violated for {f.id} at n={params.n}, x={bp.x}: {lhs:.6g} > {tight:.6g}")
    return BVRecord(
        function=f.id,
        n=params.n,
        a=params.a_float,
        x=bp.x,
        lam=bp.lambda_,
        n0=bound.n0,
        lhs=lhs,
        bound_skip_k0=tight,
        bound_k0_double=bound.k0_double,
        slack=tight - lhs,
        violated=bool(violated),
        terms=dict(bound.terms),
    )


def bv_bound_sweep(
    f: FunctionSpec,
    a,
    x: float,
    n_values: Sequence[int],
    lam: Optional[float] = None,
) -> List[Tuple[int, float, float]]:
    """(n, skip_k0, k0_double) for each n, smallest n first."""
    def one(n: int) -> Tuple[int, float, float]:
        bp = BVBoundParams(n=n, x=x) if lam is None else BVBoundParams(n=n, x=x, lambda_=lam)
        bound = bv_bound(f, OperatorParams(n=n, a=a), bp)
        return n, bound.skip_k0, bound.k0_double

    return ordered_map(one, sorted(n_values))


def is_non_increasing(values: Sequence[float], rtol: float = 1e-12) -> bool:
    return all(later <= earlier * (1 + rtol) for earlier, later in zip(values, values[1:]))


# ---------- kernel tails ----------

def check_kernel_tails(
    params: OperatorParams,
    x: float,
    lam: float,
    ys: Sequence[float],
    zs: Sequence[float],
    policy: Optional[TruncationPolicy] = None,
) -> List[BoundRecord]:
    """
    alpha(x, y) <= lam x(1+x) / ((x-y)^2 (n+1)) for 0 <= y < x and
    1 - alpha(x, z) <= lam x(1+x) / ((z-x)^2 (n+1)) for z > x.
    """
    _ensure_remark(params, x, lam)
    n = params.n
    scale = lam * x * (1 + x) / (n + 1)
    records = []
    for y in ys:
        if not 0 <= y < x:
            raise ConfigError(f"left tail points need 0 <= y < x, got y={y}, x={x}")
        records.append(BoundRecord.build(
            check="kernel_left_tail",
            function="kernel",
            n=n,
            a=params.a_float,
            x=x,
            actual=kernel_cdf(params, x, y, policy),
            bound=scale / (x - y) ** 2,
            details={"y": y},
        ))
    for z in zs:
        if z <= x:
            raise ConfigError(f"right tail points need z > x, got z={z}, x={x}")
        records.append(BoundRecord.build(
            check="kernel_right_tail",
            function="kernel",
            n=n,
            a=params.a_float,
            x=x,
            actual=kernel_survival(params, x, z, policy),
            bound=scale / (z - x) ** 2,
            details={"z": z},
        ))
    return records
