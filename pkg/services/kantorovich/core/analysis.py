# services/kantorovich/core/analysis.py
"""
Convergence laboratory: sup errors, moduli of continuity, and both sides of
every approximation inequality checked by the `bounds`, `stat`, `converge`
and `voronovskaja` commands.

Constants the estimates only assert to exist (the omega_2 constant of the
local estimate, M_1 of the weighted-modulus estimate) are fitted once on
CALIBRATION_* and then frozen for the VALIDATION_* sweep. The two grids
share no (n, a) pair.
"""
from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from cachetools import LRUCache

from core.catalog import Catalog
from core.errors import ConfigError, MissingOneSidedData, NonPositiveError
from core.moments import (
    ONE_PLUS_X,
    X,
    first_moment_shift,
    gamma_sym,
    kantorovich_central_sym,
    kantorovich_moment_sym,
    voronovskaja_limit_sym,
)
from core.operators import auxiliary_eval, kantorovich_eval, operator_derivative
from core.ratcore import RatFunc, rf_eval
from core.sweeps import ordered_map
from models.function_spec import FunctionSpec
from schemas.analysis import GridSpec, ModulusReport, RateFit, WeightedNormSpec
from schemas.params import OperatorParams, TruncationPolicy
from schemas.records import BoundRecord, DensityCurve, VoronovskajaRecord, VoronovskajaRow
from settings import get_settings

logger = logging.getLogger(__name__)

# ========== Sweep grids ==========

CALIBRATION_N = (8, 32, 128, 512)
CALIBRATION_A = (0.5, 2.0, 4.0)
CALIBRATION_X = (0.05, 0.35, 1.3, 3.7, 7.5, 12.0)

VALIDATION_N = (16, 64, 256, 1024)
VALIDATION_A = (0.0, 1.0, 3.0)
VALIDATION_X = (0.1, 0.5, 1.0, 2.0, 5.0, 10.0)

# Functions each estimate is exercised on
LOCAL_FUNCTIONS = ("one", "exp_neg", "sin", "inv1p")
LIPSCHITZ_FUNCTIONS = ("t", "sqrt", "abs_kink", "sin")
INTERVAL_FUNCTIONS = ("t", "t2", "exp_neg", "sin", "inv1p")
MODULUS_FUNCTIONS = ("t", "t2", "exp_neg", "sin", "inv1p", "sqrt")

# Right end of the x sample used for sup_x |K f - f| / (1+x^2)^(5/2)
WEIGHTED_SAMPLE_MAX = 10.0
# Tail sample of exact weighted norms reaches x_max_trunc * TAIL_REACH
TAIL_REACH = 1e6
TRUNCATION_TOL = 1e-6


def _params(n: int, a) -> OperatorParams:
    return OperatorParams(n=n, a=a)


def _operator_sample(x_max: float, points: int = 25) -> np.ndarray:
    """0 plus a log-spaced sample of (0, x_max]; enough for decaying weighted sups."""
    return np.concatenate(([0.0], np.geomspace(min(0.05, x_max), x_max, points - 1)))


# ========== Sup errors ==========

def pointwise_error(f: FunctionSpec, params: OperatorParams, x: float, policy: Optional[TruncationPolicy] = None) -> float:
    return abs(kantorovich_eval(f, params, float(x), policy) - float(f(x)))


def sup_error(
    f: FunctionSpec,
    params: OperatorParams,
    grid: GridSpec,
    policy: Optional[TruncationPolicy] = None,
) -> float:
    """max over the grid of |K_n^a(f;x) - f(x)|."""
    errors = ordered_map(lambda x: pointwise_error(f, params, x, policy), grid.values())
    return max(errors)


# ========== Moduli of continuity ==========

@dataclass(frozen=True, eq=False)
class Lattice:
    """f sampled on a uniform lattice of [lo, hi]."""
    f: FunctionSpec
    lo: float
    hi: float
    nodes: np.ndarray
    values: np.ndarray

    @property
    def eta(self) -> float:
        return (self.hi - self.lo) / (len(self.nodes) - 1)

    def steps(self, delta: float) -> int:
        """Number of lattice multiples j·eta that fit in delta."""
        return min(int(math.floor(delta / self.eta + 1e-9)), len(self.nodes) - 1)


_lattices: Optional[LRUCache] = None
_lattice_lock = threading.Lock()


def _lattice_cache() -> LRUCache:
    global _lattices
    if _lattices is None:
        _lattices = LRUCache(maxsize=get_settings().moment_cache_size)
    return _lattices


def lattice(f: FunctionSpec, lo: float, hi: float, points: Optional[int] = None) -> Lattice:
    points = points or get_settings().modulus_points
    if not hi > lo >= 0:
        raise ConfigError(f"lattice needs 0 <= lo < hi, got [{lo}, {hi}]")
    key = (f, float(lo), float(hi), points)
    cache = _lattice_cache()
    with _lattice_lock:
        hit = cache.get(key)
    if hit is not None:
        return hit
    nodes = np.linspace(lo, hi, points)
    lat = Lattice(f=f, lo=float(lo), hi=float(hi), nodes=nodes, values=np.asarray(f(nodes), dtype=float))
    with _lattice_lock:
        cache[key] = lat
    logger.debug(f"lattice for {f.id} on [{lo}, {hi}] with {points} points")
    return lat


def first_order_modulus(lat: Lattice, delta: float, *, weighted: bool = False) -> float:
    """
    sup |f(x+h) - f(x)| over lattice x and steps h = j·eta <= delta; divided
    by 1 + (x+h)^2 when `weighted`. Below one lattice step only h = delta is
    used, at every lattice x plus the right end hi - delta.
    """
    t, v = lat.nodes, lat.values
    J = lat.steps(delta)
    if J >= 1:
        best = 0.0
        for j in range(1, J + 1):
            diff = np.abs(v[j:] - v[:-j])
            if weighted:
                diff = diff / (1.0 + t[j:] ** 2)
            best = max(best, float(diff.max()))
        return best
    xs = np.append(t[t + delta <= lat.hi], lat.hi - delta)
    diff = np.abs(lat.f(xs + delta) - lat.f(xs))
    if weighted:
        diff = diff / (1.0 + (xs + delta) ** 2)
    return float(np.max(diff))


def second_order_modulus(lat: Lattice, delta: float) -> float:
    """sup |f(x+2h) - 2f(x+h) + f(x)| over the same step set as first_order_modulus."""
    v = lat.values
    J = min(lat.steps(delta), (len(v) - 1) // 2)
    if J >= 1:
        best = 0.0
        for j in range(1, J + 1):
            best = max(best, float(np.abs(v[2 * j:] - 2 * v[j:-j] + v[:-2 * j]).max()))
        return best
    if lat.lo + 2 * delta > lat.hi:
        return 0.0
    t = lat.nodes
    xs = np.append(t[t + 2 * delta <= lat.hi], lat.hi - 2 * delta)
    return float(np.max(np.abs(lat.f(xs + 2 * delta) - 2 * lat.f(xs + delta) + lat.f(xs))))


ModulusOrder = Union[int, str]


def modulus(f: FunctionSpec, delta: float, grid: GridSpec, order: ModulusOrder = "all") -> ModulusReport:
    """
    omega(f, delta), omega_2(f, delta) and Omega(f, delta) on [grid.x_min, grid.x_max].

    omega_2 takes steps h <= delta, so the second-order term of the local
    estimate is modulus(f, sqrt(gamma), ...). `order` picks which fields are
    filled: 1, 2, "weighted" or "all".
    """
    if not delta > 0:
        raise ConfigError(f"delta must be > 0, got {delta}")
    order = str(order)
    if order not in ("1", "2", "weighted", "all"):
        raise ConfigError(f"modulus order must be 1, 2, weighted or all, got {order!r}")
    lat = lattice(f, grid.x_min, grid.x_max)
    want = {"1", "2", "weighted"} if order == "all" else {order}
    return ModulusReport(
        delta=delta,
        omega=first_order_modulus(lat, delta) if "1" in want else None,
        omega2=second_order_modulus(lat, delta) if "2" in want else None,
        omega_weighted=first_order_modulus(lat, delta, weighted=True) if "weighted" in want else None,
    )


# ========== Fitted constants ==========

@dataclass(frozen=True)
class FittedConstant:
    name: str
    value: float
    required: float
    samples: int
    extra: Dict[str, float] = field(default_factory=dict)


def _calibration_points(functions: Sequence[FunctionSpec], n_values, a_values, x_values):
    return [(f, n, a, x) for f in functions for n in n_values for a in a_values for x in x_values]


# ========== Local estimate (bounded uniformly continuous f) ==========

def local_terms(
    f: FunctionSpec,
    params: OperatorParams,
    x: float,
    policy: Optional[TruncationPolicy] = None,
) -> Tuple[float, float, float]:
    """(|K f - f|, omega(f, |b|/(n+1)), omega_2(f, sqrt(gamma))) at x."""
    x = float(x)
    actual = pointwise_error(f, params, x, policy)
    shift = abs(rf_eval(first_moment_shift(params), x)) / (params.n + 1)
    gamma = rf_eval(gamma_sym(params), x)
    lat = lattice(f, 0.0, get_settings().x_max_trunc)
    w1 = first_order_modulus(lat, shift) if shift > 0 else 0.0
    w2 = second_order_modulus(lat, math.sqrt(gamma))
    return actual, w1, w2


def fit_local_constant(
    functions: Sequence[FunctionSpec],
    *,
    n_values: Sequence[int] = CALIBRATION_N,
    a_values: Sequence[float] = CALIBRATION_A,
    x_values: Sequence[float] = CALIBRATION_X,
    policy: Optional[TruncationPolicy] = None,
) -> FittedConstant:
    """
    Smallest C with |K f - f| <= C·omega_2 + omega on the calibration grid,
    times the safety factor, floored at 1.
    """
    def required(point) -> float:
        f, n, a, x = point
        actual, w1, w2 = local_terms(f, _params(n, a), x, policy)
        return (actual - w1) / w2 if w2 > 0 else 0.0

    points = _calibration_points(functions, n_values, a_values, x_values)
    worst = max(ordered_map(required, points), default=0.0)
    value = max(1.0, get_settings().calibration_safety * worst)
    logger.info(f"🔧 local-estimate constant C={value:.4g} (max required {worst:.4g} over {len(points)} points)")
    return FittedConstant(name="local_C", value=value, required=worst, samples=len(points))


@lru_cache(maxsize=32)
def _default_local_constant(f: FunctionSpec) -> float:
    return fit_local_constant([f]).value


def check_local_direct(
    f: FunctionSpec,
    params: OperatorParams,
    x: float,
    policy: Optional[TruncationPolicy] = None,
    *,
    constant: Optional[float] = None,
) -> BoundRecord:
    """|K f - f| <= C·omega_2(f, sqrt(gamma)) + omega(f, |b|/(n+1)) for bounded f."""
    if not f.bounded:
        raise ConfigError(f"{f.id}: the local estimate needs a bounded function")
    C = constant if constant is not None else _default_local_constant(f)
    actual, w1, w2 = local_terms(f, params, x, policy)
    return BoundRecord.build(
        check="local_direct",
        function=f.id,
        n=params.n,
        a=params.a_float,
        x=x,
        actual=actual,
        bound=C * w2 + w1,
        details={"omega": w1, "omega2": w2, "C": C},
    )


# ========== Lipschitz-type classes ==========

def _fprime_limit(f: FunctionSpec, x: float) -> Optional[float]:
    try:
        left, right = f.fprime_sides(x)
    except MissingOneSidedData:
        return None
    value = max(abs(left), abs(right))
    return value if math.isfinite(value) else None


def lipschitz_constant(
    f: FunctionSpec,
    x: float,
    alpha: float,
    a1: float,
    a2: float,
    t_max: Optional[float] = None,
) -> float:
    """
    Grid-certified M with |f(t) - f(x)| <= M |t-x|^alpha / (t + a1 x^2 + a2 x)^(alpha/2)
    for t in [0, t_max]; for alpha = 1 the derivative limit at t -> x is included.

    M is local to [0, t_max]. When the ratio keeps growing in t (f = t with
    alpha = 1 grows like sqrt(t + a1 x^2 + a2 x)) no M works on all of [0, inf)
    and the value depends on t_max.
    """
    lat = lattice(f, 0.0, t_max or get_settings().x_max_trunc)
    t, v = lat.nodes, lat.values
    shift = a1 * x * x + a2 * x
    fx = float(f(x))
    keep = np.abs(t - x) > 1e-12 * max(1.0, x)
    t, v = t[keep], v[keep]
    ratio = np.abs(v - fx) * (t + shift) ** (alpha / 2) / np.abs(t - x) ** alpha
    best = float(ratio.max())
    if alpha == 1.0:
        slope = _fprime_limit(f, x)
        if slope is not None:
            best = max(best, slope * math.sqrt(x + shift))
    return best


def lenze_maximal(f: FunctionSpec, x: float, tau: float, t_max: Optional[float] = None) -> float:
    """sup over t != x of |f(t) - f(x)| / |t - x|^tau, 0 < tau <= 1, on a lattice of [0, t_max]."""
    if not 0 < tau <= 1:
        raise ConfigError(f"tau must lie in (0, 1], got {tau}")
    lat = lattice(f, 0.0, t_max or get_settings().x_max_trunc)
    t, v = lat.nodes, lat.values
    keep = np.abs(t - x) > 1e-12 * max(1.0, x)
    best = float((np.abs(v[keep] - float(f(x))) / np.abs(t[keep] - x) ** tau).max())
    if tau == 1.0:
        slope = _fprime_limit(f, x)
        if slope is not None:
            best = max(best, slope)
    return best


def check_lipschitz(
    f: FunctionSpec,
    params: OperatorParams,
    x: float,
    *,
    alpha: Optional[float] = None,
    a1: float = 1.0,
    a2: float = 1.0,
    M: Optional[float] = None,
    tau: Optional[float] = None,
    policy: Optional[TruncationPolicy] = None,
) -> List[BoundRecord]:
    """
    Two records at x:
      lipschitz          |K f - f| <= M (u_2 / (a1 x^2 + a2 x))^(alpha/2)
      lipschitz_maximal  |K f - f| <= w~_tau(f, x) u_2^(tau/2)
    alpha and tau default to the catalog Hölder exponent; M defaults to the
    grid-certified constant at x, which holds for t in [0, x_max_trunc] only
    and is recorded with that range as M_t_max.
    """
    if x <= 0:
        raise ConfigError(f"Lipschitz-class checks need x > 0, got {x}")
    if a1 <= 0 or a2 <= 0:
        raise ConfigError(f"a1 and a2 must be > 0, got a1={a1}, a2={a2}")
    alpha = f.holder_alpha if alpha is None else alpha
    tau = f.holder_alpha if tau is None else tau
    if not 0 < alpha <= 1:
        raise ConfigError(f"alpha must lie in (0, 1], got {alpha}")

    actual = pointwise_error(f, params, x, policy)
    u2 = rf_eval(kantorovich_central_sym(2, params)[2], float(x))
    t_max = get_settings().x_max_trunc
    M_used = M if M is not None else lipschitz_constant(f, x, alpha, a1, a2, t_max)
    maximal = lenze_maximal(f, x, tau)
    common = dict(function=f.id, n=params.n, a=params.a_float, x=x, actual=actual)
    return [
        BoundRecord.build(
            check="lipschitz",
            bound=M_used * (u2 / (a1 * x * x + a2 * x)) ** (alpha / 2),
            details={"M": M_used, "alpha": alpha, "a1": a1, "a2": a2, "u2": u2, **({} if M is not None else {"M_t_max": t_max})},
            **common,
        ),
        BoundRecord.build(
            check="lipschitz_maximal",
            bound=maximal * u2 ** (tau / 2),
            details={"maximal": maximal, "tau": tau, "u2": u2},
            **common,
        ),
    ]


# ========== Weighted space C_rho ==========

def growth_constant(f: FunctionSpec, t_max: Optional[float] = None) -> float:
    """M_f = sup |f(t)| / (1 + t^2) on a lattice of [0, t_max]."""
    lat = lattice(f, 0.0, t_max or get_settings().x_max_trunc)
    return float((np.abs(lat.values) / (1.0 + lat.nodes ** 2)).max())


def check_weighted_interval(
    f: FunctionSpec,
    params: OperatorParams,
    x: float,
    b: float,
    policy: Optional[TruncationPolicy] = None,
) -> BoundRecord:
    """|K f - f| <= 4 M_f (1+b^2) u_2 + 2 omega_{b+1}(f, sqrt(u_2)) for x in [0, b]."""
    if not 0 <= x <= b:
        raise ConfigError(f"x={x} must lie in [0, b={b}]")
    actual = pointwise_error(f, params, x, policy)
    u2 = rf_eval(kantorovich_central_sym(2, params)[2], float(x))
    M_f = growth_constant(f)
    w = first_order_modulus(lattice(f, 0.0, b + 1.0), math.sqrt(u2))
    return BoundRecord.build(
        check="weighted_interval",
        function=f.id,
        n=params.n,
        a=params.a_float,
        x=x,
        actual=actual,
        bound=4 * M_f * (1 + b * b) * u2 + 2 * w,
        details={"M_f": M_f, "omega_b1": w, "u2": u2, "b": b},
    )


@dataclass(frozen=True)
class WeightedNorm:
    value: float
    argmax: float
    limit_at_infinity: float
    truncation_delta: float


def _limit_at_infinity(err: RatFunc, exponent: float) -> float:
    """lim err(x) / (1 + x^exponent) as x -> inf."""
    if err.is_zero:
        return 0.0
    growth = err.degree - err.pole_order
    if growth < exponent:
        return 0.0
    if growth == exponent:
        return float(err.coeffs[-1])
    return math.inf


def _rational_weighted_sup(err: RatFunc, spec: WeightedNormSpec, x_max: float) -> Tuple[float, float]:
    xs = np.concatenate([
        np.linspace(0.0, x_max, spec.points),
        np.geomspace(x_max, x_max * TAIL_REACH, 241)[1:],
    ])
    values = np.abs(np.asarray(rf_eval(err, xs), dtype=float)) / spec.rho(xs)
    i = int(np.argmax(values))
    return float(values[i]), float(xs[i])


def monomial_norm(i: int, params: OperatorParams, spec: Optional[WeightedNormSpec] = None) -> WeightedNorm:
    """
    ||K e_i - e_i||_rho for e_i = t^i, i in {0, 1, 2}, from the exact moment
    table. The sup includes the limit at infinity; truncation_delta is the
    change when the sample range doubles.
    """
    if i not in (0, 1, 2):
        raise ConfigError(f"test functions are e_0, e_1, e_2; got i={i}")
    spec = spec or WeightedNormSpec()
    err = kantorovich_moment_sym(2, params)[i] - X ** i
    limit = abs(_limit_at_infinity(err, spec.rho_exponent))
    v1, arg = _rational_weighted_sup(err, spec, spec.x_max_trunc)
    v2, _ = _rational_weighted_sup(err, spec, 2 * spec.x_max_trunc)
    value = max(v1, limit)
    return WeightedNorm(
        value=value,
        argmax=arg if v1 >= limit else math.inf,
        limit_at_infinity=limit,
        truncation_delta=abs(max(v2, limit) - value),
    )


def monomial_majorants(i: int, n: int, a: float) -> Dict[str, float]:
    """Explicit majorants of ||K e_i - e_i||_rho."""
    d = n + 1
    if i == 0:
        return {"exact": 0.0}
    if i == 1:
        return {"majorant": (2 * a + 1.5) / d, "majorant_tight": (a + 1.5) / d}
    if i == 2:
        return {
            "majorant": (2 * a + 3) / d + (a * a + 4 * a + 13 / 3) / d ** 2,
            "majorant_alt": (d * (2 * a + 1) + 2 * n + a * a + 1 / 3) / d ** 2,
        }
    raise ConfigError(f"test functions are e_0, e_1, e_2; got i={i}")


def monomial_norm_records(params: OperatorParams, spec: Optional[WeightedNormSpec] = None) -> List[BoundRecord]:
    """Every majorant of e_0, e_1, e_2 plus the truncation self-check."""
    records = []
    for i in (0, 1, 2):
        norm = monomial_norm(i, params, spec)
        details = {"limit_at_infinity": norm.limit_at_infinity, "truncation_delta": norm.truncation_delta}
        for name, bound in monomial_majorants(i, params.n, params.a_float).items():
            records.append(BoundRecord.build(
                check=f"e{i}_{name}",
                function=f"e{i}",
                n=params.n,
                a=params.a_float,
                x=norm.argmax,
                actual=norm.value,
                bound=bound,
                details=details,
            ))
        records.append(BoundRecord.build(
            check=f"e{i}_truncation",
            function=f"e{i}",
            n=params.n,
            a=params.a_float,
            x=norm.argmax,
            actual=norm.truncation_delta,
            bound=TRUNCATION_TOL,
        ))
    return records


def weighted_error_sup(
    f: FunctionSpec,
    params: OperatorParams,
    policy: Optional[TruncationPolicy] = None,
    *,
    power: float = 2.5,
    xs: Optional[np.ndarray] = None,
) -> Tuple[float, float]:
    """(sup, argmax) of |K f - f| / (1+x^2)^power over a decaying-weight sample."""
    xs = _operator_sample(WEIGHTED_SAMPLE_MAX) if xs is None else xs
    values = ordered_map(lambda x: pointwise_error(f, params, x, policy) / (1 + x * x) ** power, xs)
    i = int(np.argmax(values))
    return float(values[i]), float(xs[i])


def weighted_modulus_terms(
    f: FunctionSpec,
    params: OperatorParams,
    policy: Optional[TruncationPolicy] = None,
) -> Tuple[float, float, float]:
    """(lhs, argmax, Omega(f, n^-1/2)) of the weighted-modulus estimate."""
    lhs, arg = weighted_error_sup(f, params, policy)
    lat = lattice(f, 0.0, get_settings().x_max_trunc)
    omega = first_order_modulus(lat, params.n ** -0.5, weighted=True)
    return lhs, arg, omega


def apriori_weighted_constant(
    n_values: Sequence[int] = CALIBRATION_N,
    a_values: Sequence[float] = CALIBRATION_A,
    x_max: Optional[float] = None,
) -> FittedConstant:
    """
    M_2 with u_2 <= M_2 (1+x^2)/n, M_3 with sqrt(u_4) <= M_3 (1+x^2)/n, and
    M_1 = 2(1 + M_2 + sqrt(M_2) + M_3 sqrt(M_2)).
    """
    xs = np.linspace(0.0, x_max or get_settings().x_max_trunc, 2001)
    M2 = M3 = 0.0
    for n in n_values:
        for a in a_values:
            u = kantorovich_central_sym(4, _params(n, a))
            scale = n / (1.0 + xs ** 2)
            M2 = max(M2, float((scale * rf_eval(u[2], xs)).max()))
            M3 = max(M3, float((scale * np.sqrt(np.abs(rf_eval(u[4], xs)))).max()))
    value = 2 * (1 + M2 + math.sqrt(M2) + M3 * math.sqrt(M2))
    return FittedConstant(
        name="weighted_M1_apriori",
        value=value,
        required=value,
        samples=len(n_values) * len(a_values),
        extra={"M2": M2, "M3": M3},
    )


def fit_weighted_modulus_constant(
    functions: Sequence[FunctionSpec],
    *,
    n_values: Sequence[int] = CALIBRATION_N,
    a_values: Sequence[float] = CALIBRATION_A,
    policy: Optional[TruncationPolicy] = None,
) -> FittedConstant:
    def required(point) -> float:
        f, n, a = point
        lhs, _, omega = weighted_modulus_terms(f, _params(n, a), policy)
        return lhs / omega if omega > 0 else 0.0

    points = [(f, n, a) for f in functions for n in n_values for a in a_values]
    worst = max(ordered_map(required, points), default=0.0)
    value = get_settings().calibration_safety * worst if worst > 0 else 1.0
    logger.info(f"🔧 weighted-modulus constant M1={value:.4g} (max required {worst:.4g} over {len(points)} points)")
    return FittedConstant(name="weighted_M1", value=value, required=worst, samples=len(points))


@lru_cache(maxsize=32)
def _default_weighted_constant(f: FunctionSpec) -> float:
    return fit_weighted_modulus_constant([f]).value


def check_weighted_modulus(
    f: FunctionSpec,
    params: OperatorParams,
    policy: Optional[TruncationPolicy] = None,
    *,
    constant: Optional[float] = None,
    apriori: Optional[float] = None,
) -> BoundRecord:
    """sup_x |K f - f| / (1+x^2)^(5/2) <= M_1 Omega(f, n^-1/2)."""
    M1 = constant if constant is not None else _default_weighted_constant(f)
    lhs, arg, omega = weighted_modulus_terms(f, params, policy)
    details = {"Omega": omega, "M1": M1}
    if apriori is not None:
        details["M1_apriori"] = apriori
    return BoundRecord.build(
        check="weighted_modulus",
        function=f.id,
        n=params.n,
        a=params.a_float,
        x=arg,
        actual=lhs,
        bound=M1 * omega,
        details=details,
    )


def check_weighted(
    f: FunctionSpec,
    params: OperatorParams,
    spec: Optional[WeightedNormSpec] = None,
    b: float = 5.0,
    x_values: Sequence[float] = VALIDATION_X,
    policy: Optional[TruncationPolicy] = None,
    *,
    constant: Optional[float] = None,
) -> List[BoundRecord]:
    """Finite-interval records for x <= b, the test-function norms and the weighted-modulus record."""
    records = [check_weighted_interval(f, params, x, b, policy) for x in x_values if 0 <= x <= b]
    records.extend(monomial_norm_records(params, spec))
    records.append(check_weighted_modulus(f, params, policy, constant=constant))
    return records


# ========== Statistical convergence ==========

def majorant_threshold(majorant: Callable[[int], float], epsilon: float) -> int:
    """
    Largest k >= 1 with majorant(k) >= epsilon for a non-increasing majorant;
    0 when there is none. Past it no k can belong to {k : b_k >= epsilon}.
    """
    if epsilon <= 0:
        raise ConfigError(f"epsilon must be > 0, got {epsilon}")
    if majorant(1) < epsilon:
        return 0
    lo, hi = 1, 2
    while majorant(hi) >= epsilon:
        lo, hi = hi, hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if majorant(mid) >= epsilon:
            lo = mid
        else:
            hi = mid
    return lo


def monomial_threshold(i: int, a: float, epsilon: float) -> int:
    """majorant_threshold of the main majorant of ||K_k e_i - e_i||_rho."""
    if i == 0:
        return 0
    return majorant_threshold(lambda k: monomial_majorants(i, k, a)["majorant"], epsilon)


def stat_density(seq_bounds: Sequence[float], epsilon: float, threshold: Optional[int] = None) -> DensityCurve:
    """
    Cesaro density (1/n)·#{k <= n : b_k >= epsilon} for n = 1..len(seq_bounds);
    seq_bounds[0] is b_1.
    """
    if epsilon <= 0:
        raise ConfigError(f"epsilon must be > 0, got {epsilon}")
    members = [k for k, b in enumerate(seq_bounds, start=1) if b >= epsilon]
    hits = np.zeros(len(seq_bounds))
    hits[np.asarray(members, dtype=int) - 1] = 1.0
    density = np.cumsum(hits) / np.arange(1, len(seq_bounds) + 1)
    return DensityCurve(
        epsilon=epsilon,
        density=[float(d) for d in density],
        members=members,
        last_member=members[-1] if members else None,
        threshold=threshold,
    )


def monomial_norm_sequence(i: int, a, N: int, spec: Optional[WeightedNormSpec] = None) -> List[float]:
    """b_k = ||K_k e_i - e_i||_rho for k = 1..N."""
    if N < 1:
        raise ConfigError(f"N must be >= 1, got {N}")
    return ordered_map(lambda k: monomial_norm(i, _params(k, a), spec).value, range(1, N + 1))


def weighted_alpha_norms(
    f: FunctionSpec,
    a,
    n_values: Sequence[int],
    alpha: float,
    spec: Optional[WeightedNormSpec] = None,
    policy: Optional[TruncationPolicy] = None,
    *,
    points: int = 33,
    xs: Optional[Sequence[float]] = None,
) -> List[Tuple[int, float]]:
    """
    ||K_n f - f|| in the rho_alpha = 1 + x^(2+alpha) norm, sampled at `xs`
    or, without it, on [0, x_max_trunc].
    """
    if alpha <= 0:
        raise ConfigError(f"alpha must be > 0, got {alpha}")
    spec = spec or WeightedNormSpec(rho_exponent=2 + alpha)
    if xs is not None and len(xs) == 0:
        raise ConfigError("weighted_alpha_norms needs at least one x")
    xs = _operator_sample(spec.x_max_trunc, points) if xs is None else np.asarray(xs, dtype=float)

    def norm(n: int) -> Tuple[int, float]:
        params = _params(n, a)
        errors = np.array([pointwise_error(f, params, x, policy) for x in xs])
        return n, float((errors / spec.rho(xs)).max())

    return ordered_map(norm, n_values)


# ========== Voronovskaja-type limits ==========

def voronovskaja_limit(f: FunctionSpec, a: float, x: float, r: int) -> float:
    """lim n·(D^r K_n^a f - f^(r)) at x, for r in {0, 1}."""
    d = [float(f.derivative(k)(np.asarray(x, dtype=float))) for k in range(1, r + 3)]
    A = a * x / (1 + x)
    if r == 0:
        return (A + 0.5 - x) * d[0] + (x + x * x) / 2 * d[1]
    if r == 1:
        return (-1 + a / (1 + x) ** 2) * d[0] + (1 + A) * d[1] + x * (1 + x) * d[2] / 2
    raise ConfigError(f"Voronovskaja limits cover r = 0 and r = 1, got {r}")


def voronovskaja_check(
    f: FunctionSpec,
    a,
    x: float,
    r: int,
    n_values: Sequence[int],
    policy: Optional[TruncationPolicy] = None,
) -> VoronovskajaRecord:
    """L_n = n·(D^r K f - f^(r)) against its limit; decay fitted when >= 3 positive gaps."""
    if x <= 0:
        raise ConfigError(f"Voronovskaja checks need x > 0, got {x}")
    a_float = float(a)
    limit = voronovskaja_limit(f, a_float, x, r)

    def row(n: int) -> VoronovskajaRow:
        params = _params(n, a)
        if r == 0:
            scaled = n * (kantorovich_eval(f, params, x, policy) - float(f(x)))
            err_est = None
        else:
            est = operator_derivative(f, params, x, r, policy)
            scaled = n * (est.value - float(f.derivative(r)(np.asarray(x, dtype=float))))
            err_est = n * est.error_estimate
        return VoronovskajaRow(
            n=n, scaled_error=scaled, limit=limit, abs_diff=abs(scaled - limit), derivative_error_estimate=err_est
        )

    rows = ordered_map(row, sorted(n_values))
    decay = None
    gaps = [(row.n, row.abs_diff) for row in rows]
    if len(gaps) >= 3 and all(g > 0 for _, g in gaps):
        decay = rate_fit(gaps)
    for item in rows:
        logger.debug(f"voronovskaja {f.id} r={r} n={item.n}: L_n={item.scaled_error:.6g} limit={limit:.6g}")
    return VoronovskajaRecord(function=f.id, a=a_float, x=float(x), r=r, rows=rows, decay=decay)


def voronovskaja_expression_sym(power: int, a) -> RatFunc:
    """(ax/(1+x) + 1/2 - x) f' + (x + x^2) f''/2 for f = t^power, as a RatFunc."""
    A = OperatorParams(n=1, a=a).a_exact * X / ONE_PLUS_X
    out = RatFunc()
    if power >= 1:
        out = out + (A + RatFunc.const(1) / 2 - X) * power * X ** (power - 1)
    if power >= 2:
        out = out + (X + X ** 2) * RatFunc.const(power * (power - 1)) / 2 * X ** (power - 2)
    return out


def voronovskaja_identity(power: int, a) -> bool:
    """The exact limit of n·(T_{n,power} - x^power) equals the r = 0 expression applied to t^power."""
    return voronovskaja_limit_sym(power, a) == voronovskaja_expression_sym(power, a)


def scaled_error_sym(power: int, params: OperatorParams) -> RatFunc:
    """n·(T_{n,power} - x^power) exactly."""
    return params.n * (kantorovich_moment_sym(power, params)[power] - X ** power)


# ========== Rates ==========

def rate_fit(errors: Sequence[Tuple[int, float]]) -> RateFit:
    """Least squares of log e_n = log C - s log n."""
    if len(errors) < 3:
        raise ConfigError(f"rate fit needs >= 3 points, got {len(errors)}")
    ns = np.array([n for n, _ in errors], dtype=float)
    es = np.array([e for _, e in errors], dtype=float)
    if np.any(es <= 0) or not np.all(np.isfinite(es)):
        raise NonPositiveError(f"rate fit needs positive finite errors, got {es.tolist()}")
    log_n, log_e = np.log(ns), np.log(es)
    slope, intercept = np.polyfit(log_n, log_e, 1)
    residual = float(np.max(np.abs(log_e - (intercept + slope * log_n))))
    return RateFit(exponent=float(-slope), constant=float(math.exp(intercept)), residual=residual, points=len(errors))


def degree_of_approximation(
    f: FunctionSpec,
    a,
    r: int,
    interval: Tuple[float, float],
    n_values: Sequence[int],
    policy: Optional[TruncationPolicy] = None,
    *,
    points: int = 9,
) -> Tuple[List[Tuple[int, float]], RateFit]:
    """sup over [c, d] of |D^r K_n f - f^(r)| for each n, and its fitted rate."""
    c, d = interval
    if not 0 < c < d:
        raise ConfigError(f"interval must satisfy 0 < c < d, got [{c}, {d}]")
    if r not in (0, 1, 2, 3):
        raise ConfigError(f"derivative order must be 0..3, got {r}")
    xs = np.linspace(c, d, points)
    target = f.derivative(r)

    def sup_at(n: int) -> Tuple[int, float]:
        params = _params(n, a)
        if r == 0:
            errs = [pointwise_error(f, params, x, policy) for x in xs]
        else:
            errs = [
                abs(operator_derivative(f, params, float(x), r, policy).value - float(target(np.asarray(x))))
                for x in xs
            ]
        return n, max(errs)

    sups = ordered_map(sup_at, sorted(n_values))
    return sups, rate_fit(sups)


# ========== Auxiliary operator ==========

def check_auxiliary_bound(
    f: FunctionSpec,
    params: OperatorParams,
    x: float,
    policy: Optional[TruncationPolicy] = None,
) -> BoundRecord:
    """|K~(f;x) - f(x)| <= gamma(x)·||f''|| / 2."""
    if f.second_sup is None:
        raise ConfigError(f"{f.id}: sup |f''| is not known")
    actual = abs(auxiliary_eval(f, params, x, policy) - float(f(x)))
    gamma = rf_eval(gamma_sym(params), float(x))
    return BoundRecord.build(
        check="auxiliary",
        function=f.id,
        n=params.n,
        a=params.a_float,
        x=x,
        actual=actual,
        bound=0.5 * gamma * f.second_sup,
        details={"gamma": gamma},
    )


# ========== Bound suite ==========

@dataclass
class SuiteResult:
    records: List[BoundRecord]
    constants: List[FittedConstant]

    @property
    def violations(self) -> List[BoundRecord]:
        return [r for r in self.records if r.violated]


def bound_suite(
    catalog: Catalog,
    *,
    n_values: Sequence[int] = VALIDATION_N,
    a_values: Sequence[float] = VALIDATION_A,
    x_values: Sequence[float] = VALIDATION_X,
    b: float = 5.0,
    policy: Optional[TruncationPolicy] = None,
    calibration: Optional[Dict[str, Sequence]] = None,
    spec: Optional[WeightedNormSpec] = None,
) -> SuiteResult:
    """
    Every inequality over the validation grid, with constants fitted first on
    the calibration grid (`calibration` may override its n/a/x lists).
    """
    cal = {"n_values": CALIBRATION_N, "a_values": CALIBRATION_A, "x_values": CALIBRATION_X}
    cal.update(calibration or {})
    local_fns = [catalog.get(i) for i in LOCAL_FUNCTIONS]
    modulus_fns = [catalog.get(i) for i in MODULUS_FUNCTIONS]

    logger.info(f"🔧 calibrating on n={list(cal['n_values'])}, a={list(cal['a_values'])}")
    local_C = fit_local_constant(local_fns, policy=policy, **cal)
    M1 = fit_weighted_modulus_constant(
        modulus_fns, n_values=cal["n_values"], a_values=cal["a_values"], policy=policy
    )
    apriori = apriori_weighted_constant(cal["n_values"], cal["a_values"])

    grid = [(n, a) for n in n_values for a in a_values]
    records: List[BoundRecord] = []

    def local(point):
        f, n, a, x = point
        return check_local_direct(f, _params(n, a), x, policy, constant=local_C.value)

    records += ordered_map(local, [(f, n, a, x) for f in local_fns for n, a in grid for x in x_values])

    def lipschitz(point):
        f, n, a, x = point
        return check_lipschitz(f, _params(n, a), x, policy=policy)

    lip_points = [
        (catalog.get(i), n, a, x) for i in LIPSCHITZ_FUNCTIONS for n, a in grid for x in x_values if x > 0
    ]
    for pair in ordered_map(lipschitz, lip_points):
        records += pair

    def interval(point):
        f, n, a, x = point
        return check_weighted_interval(f, _params(n, a), x, b, policy)

    records += ordered_map(interval, [
        (catalog.get(i), n, a, x) for i in INTERVAL_FUNCTIONS for n, a in grid for x in x_values if x <= b
    ])

    for n, a in grid:
        records += monomial_norm_records(_params(n, a), spec)

    def weighted(point):
        f, n, a = point
        return check_weighted_modulus(f, _params(n, a), policy, constant=M1.value, apriori=apriori.value)

    records += ordered_map(weighted, [(f, n, a) for f in modulus_fns for n, a in grid])

    result = SuiteResult(records=records, constants=[local_C, M1, apriori])
    for bad in result.violations:
        logger.warning(f"✗ {bad.check} violated for {bad.function} at n={bad.n}, a={bad.a}, x={bad.x}")
    logger.info(f"✓ bound suite: {len(records)} checks, {len(result.violations)} violations")
    return result
