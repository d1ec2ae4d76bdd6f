# services/kantorovich/core/basis.py
"""
The generalized Baskakov basis

    W_{n,k}^a(x) = e^{-ax/(1+x)} · P_k(n,a)/k! · x^k / (1+x)^{n+k},
    P_k(n,a) = sum_i C(k,i) (n)_i a^{k-i}.

Weights are produced by forward ratios from W_0, with the P-ratio
rho_k = P_{k+1}/P_k advanced by rho_k = (a+n+k) - a·k/rho_{k-1}. The running
product carries a separate power-of-two exponent so neither W_0 nor the
intermediate products underflow, whatever n and x are.
"""
from __future__ import annotations

import logging
import math
from fractions import Fraction
from typing import List, Optional, Tuple, Union

import mpmath
import numpy as np
from scipy.special import gammaln

from core.errors import ConfigError, TruncationFailure
from models.weight_row import WeightRow
from schemas.params import OperatorParams, TruncationPolicy
from settings import get_settings

logger = logging.getLogger(__name__)

Exact = Union[int, Fraction]

# Keep the running mantissa inside [2^-RESCALE, 2^RESCALE]
_RESCALE = 500
_TINY = 2.0 ** -_RESCALE
_HUGE = 2.0 ** _RESCALE


# ---------- exact polynomials P_k(n, a) ----------

def rising_factorial(n: Exact, i: int) -> Exact:
    """(n)_i = n(n+1)...(n+i-1), (n)_0 = 1."""
    if i < 0:
        raise ConfigError(f"rising factorial needs i >= 0, got {i}")
    out: Exact = 1
    for j in range(i):
        out = out * (n + j)
    return out


def pk_direct(k: int, params: OperatorParams) -> Fraction:
    """Definition sum; the oracle pk_recurrence is validated against."""
    n, a = params.n, params.a_exact
    return sum(
        (math.comb(k, i) * rising_factorial(n, i) * a ** (k - i) for i in range(k + 1)),
        Fraction(0),
    )


def pk_recurrence(k_max: int, params: OperatorParams) -> List[Fraction]:
    """P_0..P_{k_max} via P_{k+1} = (a+n+k)P_k - a·k·P_{k-1}."""
    if k_max < 0:
        raise ConfigError(f"k_max must be >= 0, got {k_max}")
    n, a = params.n, params.a_exact
    out = [Fraction(1)]
    if k_max >= 1:
        out.append(a + n)
    for k in range(1, k_max):
        out.append((a + n + k) * out[k] - a * k * out[k - 1])
    return out


# ---------- float weights ----------

def _mpf(value) -> mpmath.mpf:
    if isinstance(value, Fraction):
        return mpmath.mpf(value.numerator) / value.denominator
    return mpmath.mpf(value)


def _first_weight_scaled(n: int, a, x: float) -> Tuple[float, int]:
    """W_0 = e^{-ax/(1+x)} (1+x)^{-n} as (mantissa, exponent), W_0 = m·2^e."""
    with mpmath.workdps(get_settings().mp_dps):
        xm = mpmath.mpf(x)
        log2_w0 = (-_mpf(a) * xm / (1 + xm) - n * mpmath.log(1 + xm)) / mpmath.log(2)
        e = mpmath.floor(log2_w0)
        mantissa = mpmath.mpf(2) ** (log2_w0 - e)
        return float(mantissa), int(e)


def _two_sum(a: float, b: float) -> Tuple[float, float]:
    """s + err == a + b exactly."""
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _check_x(x: float) -> float:
    x = float(x)
    if not math.isfinite(x) or x < 0:
        raise ConfigError(f"x must be a finite number >= 0, got {x}")
    return x


def _drift_correction(count: int, x: float) -> np.ndarray:
    """
    Each forward step divides by fl(1+x) = s instead of s + err, which
    scales W_k by (1 + err/s)^k; this undoes it.
    """
    s, err = _two_sum(1.0, x)
    if err == 0.0:
        return np.ones(count)
    return np.exp(-np.arange(count) * math.log1p(err / s))


def weight(k: int, params: OperatorParams, x: float) -> float:
    """Single W_{n,k}^a(x) by running the forward product up to k."""
    if k < 0:
        raise ConfigError(f"k must be >= 0, got {k}")
    x = _check_x(x)
    if x == 0.0:
        return 1.0 if k == 0 else 0.0
    n, a = params.n, params.a_float
    s = 1.0 + x
    w, expo = _first_weight_scaled(n, params.a, x)
    rho = a + n
    for j in range(k):
        w = w * (rho * x) / ((j + 1) * s)
        rho = (a + n + j + 1) - a * (j + 1) / rho
        if w < _TINY or w > _HUGE:
            m, e = math.frexp(w)
            w, expo = m, expo + e
    return math.ldexp(w, expo) * float(_drift_correction(k + 1, x)[k])


def weight_row(
    params: OperatorParams,
    x: float,
    policy: Optional[TruncationPolicy] = None,
    *,
    fixed_terms: Optional[int] = None,
) -> WeightRow:
    """
    W_{n,k}^a(x) for k = 0..K with a certified tail bound.

    K is the first index where the geometric majorant of the remaining
    ratios, q_K = (a+n+K)/(K+1) · x/(1+x), is below 1 and
    W_K·q_K/(1-q_K) <= tail_mass_tol. With `fixed_terms` the row stops at
    exactly that K instead (used to keep finite-difference stencils on one
    index set); the certificate is still computed there.

    Raises:
        TruncationFailure: term budget exhausted or the certificate fails
    """
    policy = policy or TruncationPolicy()
    x = _check_x(x)
    n, a = params.n, params.a_float
    if x == 0.0:
        return WeightRow(n=n, a=a, x=0.0, values=np.array([1.0]), tail_mass=0.0)

    tol = policy.tail_mass_tol
    budget = policy.budget(n, x) if fixed_terms is None else fixed_terms
    s = 1.0 + x
    ratio_limit = x / s

    w, expo = _first_weight_scaled(n, params.a, x)
    rho = a + n
    values = [math.ldexp(w, expo)]
    k = 0
    tail = math.inf
    while True:
        q = (a + n + k) / (k + 1) * ratio_limit
        if q < 1.0:
            tail = values[k] * q / (1.0 - q) * (1.0 + 1e-9)
            if fixed_terms is None and tail <= tol:
                break
        if fixed_terms is not None and k == fixed_terms:
            break
        if k >= budget:
            raise TruncationFailure(
                f"no tail certificate within {budget} terms (n={n}, a={a}, x={x}); "
                f"x or n outside the supported range"
            )
        w = w * (rho * x) / ((k + 1) * s)
        rho = (a + n + k + 1) - a * (k + 1) / rho
        if w < _TINY or w > _HUGE:
            m, e = math.frexp(w)
            w, expo = m, expo + e
        values.append(math.ldexp(w, expo))
        k += 1

    if not math.isfinite(tail):
        raise TruncationFailure(f"row cut at K={k} before the weight mode (n={n}, a={a}, x={x})")
    row_values = np.asarray(values) * _drift_correction(len(values), x)
    row = WeightRow(n=n, a=a, x=x, values=row_values, tail_mass=float(tail))
    row.validate(tol if fixed_terms is None else max(tol, tail))
    logger.debug(f"weight row n={n} a={a} x={x}: K={row.K}, tail={row.tail_mass:.2e}")
    return row


def baskakov_classical_weight(k: int, n: int, x: float) -> float:
    """a = 0 weight C(n+k-1, k) x^k (1+x)^{-n-k}, via log-gamma."""
    if x == 0.0:
        return 1.0 if k == 0 else 0.0
    log_w = (
        gammaln(n + k) - gammaln(k + 1) - gammaln(n)
        + k * math.log(x) - (n + k) * math.log1p(x)
    )
    return float(np.exp(log_w))


# ---------- property check ----------

def _richardson_first_derivative(fn, x: float, h: float) -> float:
    def central(step: float) -> float:
        return (fn(x + step) - fn(x - step)) / (2 * step)

    d = [central(h), central(h / 2), central(h / 4)]
    d1 = [(4 * d[1] - d[0]) / 3, (4 * d[2] - d[1]) / 3]
    return (16 * d1[1] - d1[0]) / 15


def weight_log_derivative_check(k: int, params: OperatorParams, x: float) -> float:
    """
    |x(1+x)^2 W' - ((k - nx)(1+x) - ax) W| with W' from Richardson-extrapolated
    central differences. Should be tiny relative to W.
    """
    x = _check_x(x)
    if x <= 0:
        raise ConfigError("weight_log_derivative_check needs x > 0")
    n, a = params.n, params.a_float
    h = 1e-2 * min(1.0, x)
    w = weight(k, params, x)
    dw = _richardson_first_derivative(lambda t: weight(k, params, t), x, h)
    return abs(x * (1 + x) ** 2 * dw - ((k - n * x) * (1 + x) - a * x) * w)
