# services/kantorovich/core/operators.py
"""
Numerical evaluation of

    K_n^a(f;x)  = (n+1) sum_k W_{n,k}^a(x) ∫_{k/(n+1)}^{(k+1)/(n+1)} f(t) dt
    B*_{n,a}(f;x) = sum_k W_{n,k}^a(x) f(k/(n+1))

plus the auxiliary operator, the piecewise-constant kernel J_n^a(x,t) with
its partial integral, and x-derivatives of K_n^a(f;x).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss

from core.basis import weight_row
from core.errors import ConfigError, StepUnderflow
from models.function_spec import FunctionSpec
from models.weight_row import WeightRow
from schemas.params import OperatorParams, TruncationPolicy
from settings import get_settings

logger = logging.getLogger(__name__)


# ---------- quadrature ----------

@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Gauss–Legendre nodes and weights on [-1, 1]."""
    order: int
    nodes: np.ndarray
    weights: np.ndarray

    @classmethod
    def gauss_legendre(cls, order: Optional[int] = None) -> "QuadratureRule":
        return _gauss_legendre(order or get_settings().quadrature_order)

    def integrate(self, fn: Callable[[np.ndarray], np.ndarray], lo: float, hi: float) -> float:
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        return float(half * np.dot(self.weights, fn(mid + half * self.nodes)))


@lru_cache(maxsize=16)
def _gauss_legendre(order: int) -> QuadratureRule:
    if order < 1:
        raise ConfigError(f"quadrature order must be >= 1, got {order}")
    nodes, weights = leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(order=order, nodes=nodes, weights=weights)


def _split_points(f: FunctionSpec, lo: float, hi: float) -> list:
    inner = [b for b in f.breakpoints if lo < b < hi]
    return [lo, *inner, hi]


def integrate(f: FunctionSpec, lo: float, hi: float, rule: Optional[QuadratureRule] = None) -> float:
    """∫_lo^hi f, split at f's breakpoints so no node straddles a kink."""
    rule = rule or QuadratureRule.gauss_legendre()
    pts = _split_points(f, lo, hi)
    return math.fsum(rule.integrate(f, p, q) for p, q in zip(pts, pts[1:]))


def cell_integral(f: FunctionSpec, k: int, n: int, rule: Optional[QuadratureRule] = None) -> float:
    if k < 0 or n < 0:
        raise ConfigError(f"cell index needs k >= 0 and n >= 0, got k={k}, n={n}")
    return integrate(f, k / (n + 1), (k + 1) / (n + 1), rule)


def _cell_means(f: FunctionSpec, n: int, K: int, rule: QuadratureRule) -> np.ndarray:
    """(n+1)·∫ over cells 0..K, i.e. the mean of f on each cell."""
    ks = np.arange(K + 1, dtype=float)[:, None]
    t = (ks + 0.5 * (rule.nodes[None, :] + 1.0)) / (n + 1)
    means = 0.5 * (f(t) @ rule.weights)
    for b in f.breakpoints:
        pos = b * (n + 1)
        k = math.floor(pos)
        if pos != k and k <= K:
            means[k] = (n + 1) * cell_integral(f, k, n, rule)
    return means


# ---------- operators ----------

def _row(params: OperatorParams, x: float, policy: Optional[TruncationPolicy], fixed_terms: Optional[int]) -> WeightRow:
    return weight_row(params, x, policy, fixed_terms=fixed_terms)


def kantorovich_eval(
    f: FunctionSpec,
    params: OperatorParams,
    x: float,
    policy: Optional[TruncationPolicy] = None,
    *,
    fixed_terms: Optional[int] = None,
    rule: Optional[QuadratureRule] = None,
) -> float:
    """
    K_n^a(f;x). The truncation error is at most tail_mass times the sup of
    |f| over the dropped cells.
    """
    row = _row(params, x, policy, fixed_terms)
    means = _cell_means(f, params.n, row.K, rule or QuadratureRule.gauss_legendre())
    return float(np.dot(row.values, means))


def baskakov_eval(
    f: FunctionSpec,
    params: OperatorParams,
    x: float,
    policy: Optional[TruncationPolicy] = None,
) -> float:
    """B*_{n,a}(f;x) = sum_k W_k f(k/(n+1))."""
    row = _row(params, x, policy, None)
    nodes = np.arange(row.K + 1, dtype=float) / (params.n + 1)
    return float(np.dot(row.values, f(nodes)))


def auxiliary_shift(params: OperatorParams, x: float) -> float:
    """s_n(x) = (nx + ax/(1+x) + 1/2)/(n+1) = K_n^a(t; x)."""
    n, a = params.n, params.a_float
    return (n * x + a * x / (1 + x) + 0.5) / (n + 1)


def auxiliary_eval(
    f: FunctionSpec,
    params: OperatorParams,
    x: float,
    policy: Optional[TruncationPolicy] = None,
) -> float:
    """K~(f;x) = K_n^a(f;x) - f(s_n(x)) + f(x); reproduces linear functions."""
    k_val = kantorovich_eval(f, params, x, policy)
    return k_val - float(f(auxiliary_shift(params, x))) + float(f(x))


# ---------- kernel ----------

def kernel_density(
    params: OperatorParams,
    x: float,
    t: float,
    policy: Optional[TruncationPolicy] = None,
) -> float:
    """J_n^a(x,t) = (n+1) W_{n, floor(t(n+1))}(x); zero past the certified row."""
    if t < 0:
        raise ConfigError(f"t must be >= 0, got {t}")
    row = _row(params, x, policy, None)
    j = math.floor(t * (params.n + 1))
    return (params.n + 1) * float(row.values[j]) if j <= row.K else 0.0


def _cdf_from_row(row: WeightRow, n: int, y: float) -> float:
    if y <= 0:
        return 0.0
    pos = y * (n + 1)
    j = math.floor(pos)
    if j > row.K:
        return row.total
    return math.fsum(row.values[:j]) + (pos - j) * float(row.values[j])


def _survival_from_row(row: WeightRow, n: int, z: float) -> float:
    """1 - alpha(x,z), summed directly (plus the tail bound) to avoid cancellation."""
    if z <= 0:
        return row.total + row.tail_mass
    pos = z * (n + 1)
    j = math.floor(pos)
    if j > row.K:
        return row.tail_mass
    return math.fsum(row.values[j + 1:]) + (1.0 - (pos - j)) * float(row.values[j]) + row.tail_mass


def kernel_cdf(
    params: OperatorParams,
    x: float,
    y: float,
    policy: Optional[TruncationPolicy] = None,
) -> float:
    """alpha_n^a(x,y) = ∫_0^y J_n^a(x,t) dt, exact for the piecewise-constant kernel."""
    return _cdf_from_row(_row(params, x, policy, None), params.n, y)


def kernel_survival(
    params: OperatorParams,
    x: float,
    z: float,
    policy: Optional[TruncationPolicy] = None,
) -> float:
    return _survival_from_row(_row(params, x, policy, None), params.n, z)


def kernel_eval(
    f: FunctionSpec,
    params: OperatorParams,
    x: float,
    policy: Optional[TruncationPolicy] = None,
) -> float:
    """K_n^a(f;x) through the integral representation ∫ J(x,t) f(t) dt, cell by cell."""
    row = _row(params, x, policy, None)
    rule = QuadratureRule.gauss_legendre()
    n = params.n
    density = (n + 1) * row.values
    return math.fsum(float(density[k]) * cell_integral(f, k, n, rule) for k in range(row.K + 1))


# ---------- derivatives in x ----------

@dataclass(frozen=True)
class DerivativeEstimate:
    value: float
    error_estimate: float
    step: float


def _stencil(F: Callable[[float], float], x: float, h: float, r: int) -> float:
    if r == 1:
        return (F(x + h) - F(x - h)) / (2 * h)
    if r == 2:
        return (F(x + h) - 2 * F(x) + F(x - h)) / h ** 2
    return (F(x + 2 * h) - 2 * F(x + h) + 2 * F(x - h) - F(x - 2 * h)) / (2 * h ** 3)


def richardson(F: Callable[[float], float], x: float, h: float, r: int) -> DerivativeEstimate:
    """Central differences at h, h/2, h/4 with two Richardson levels (h^2, h^4)."""
    d0 = [_stencil(F, x, h / 2 ** i, r) for i in range(3)]
    d1 = [(4 * d0[i + 1] - d0[i]) / 3 for i in range(2)]
    d2 = (16 * d1[1] - d1[0]) / 15
    return DerivativeEstimate(value=d2, error_estimate=abs(d2 - d1[1]), step=h)


def derivative_step(x: float, r: int) -> float:
    """
    h0 = max(x,1)·eps^{1/(r+2)}, shrunk so the stencil stays in [0, inf).

    Raises:
        StepUnderflow: the smallest Richardson step would drop below 1e-6·max(x,1)
    """
    if r not in (1, 2, 3):
        raise ConfigError(f"derivative order must be 1, 2 or 3, got {r}")
    if x <= 0:
        raise ConfigError(f"derivatives need x > 0, got {x}")
    reach = 2 if r == 3 else 1
    h = min(max(x, 1.0) * np.finfo(float).eps ** (1.0 / (r + 2)), x / reach)
    if h / 4 < 1e-6 * max(x, 1.0):
        raise StepUnderflow(f"step {h / 4:.2e} below 1e-6·max(x,1) at x={x} (r={r})")
    return h


def operator_derivative(
    f: FunctionSpec,
    params: OperatorParams,
    x: float,
    r: int,
    policy: Optional[TruncationPolicy] = None,
) -> DerivativeEstimate:
    """
    d^r/dx^r K_n^a(f;x) by finite differences. All stencil points share the
    index set of the row at the right-most point, so truncation does not
    jump between evaluations.
    """
    h = derivative_step(x, r)
    reach = 2 if r == 3 else 1
    K = weight_row(params, x + reach * h, policy).K
    return richardson(lambda t: kantorovich_eval(f, params, t, policy, fixed_terms=K), x, h, r)
