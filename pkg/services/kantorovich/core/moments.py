# services/kantorovich/core/moments.py
"""
Exact moment tables of the basis and of K_n^a.

Families (all exact RatFuncs in x for fixed rational n, a):
  upsilon  raw moments of the point operator, sum W_k (k/(n+1))^r
  mu       central moments of the point operator, sum W_k (k/(n+1) - x)^r
  mu_star  central moments with nodes k/n
  T        raw moments of K_n^a
  u        central moments of K_n^a
plus gamma = u_2 + b^2/(n+1)^2 with b = -x + ax/(1+x) + 1/2.
"""
from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from cachetools import LRUCache

from core.errors import ConfigError
from core.ratcore import LeadingOrder, RatFunc, rf_derive, rf_eval, rf_leading_order
from schemas.params import OperatorParams
from settings import get_settings

logger = logging.getLogger(__name__)

FAMILIES = ("upsilon", "mu", "mu_star", "T", "u")
CENTRAL_FAMILIES = ("mu", "mu_star", "u")

X = RatFunc.x()
ONE_PLUS_X = RatFunc((1, 1))


@dataclass(frozen=True)
class MomentTable:
    params: OperatorParams
    family: str
    entries: Tuple[RatFunc, ...]

    @property
    def r_max(self) -> int:
        return len(self.entries) - 1

    def __getitem__(self, r: int) -> RatFunc:
        return self.entries[r]

    def evaluate(self, r: int, x):
        return rf_eval(self.entries[r], x)

    def to_json(self) -> Dict[str, object]:
        return {
            "n": self.params.n,
            "a": str(self.params.a_exact),
            "family": self.family,
            "entries": [dict(r=r, **f.to_json()) for r, f in enumerate(self.entries)],
        }


# ---------- cache ----------

_cache: Optional[LRUCache] = None
_cache_lock = threading.Lock()


def _get_cache() -> LRUCache:
    global _cache
    if _cache is None:
        _cache = LRUCache(maxsize=get_settings().moment_cache_size)
    return _cache


def clear_cache() -> None:
    with _cache_lock:
        _get_cache().clear()


def _cached(family: str, params: OperatorParams, r_max: int, build: Callable[[], List[RatFunc]]) -> MomentTable:
    if r_max < 0:
        raise ConfigError(f"r_max must be >= 0, got {r_max}")
    key = (params.n, params.a_exact, family, r_max)
    cache = _get_cache()
    with _cache_lock:
        hit = cache.get(key)
    if hit is not None:
        return hit
    table = MomentTable(params=params, family=family, entries=tuple(build()))
    with _cache_lock:
        cache[key] = table
    logger.debug(f"moment table {family} r_max={r_max} built for {params.label()}")
    return table


def _exact(params: OperatorParams) -> Tuple[int, Fraction]:
    return params.n, params.a_exact


# ---------- recurrences ----------

def upsilon_sym(r_max: int, params: OperatorParams) -> MomentTable:
    """
    upsilon_{r+1} = [x(1+x)^2 upsilon_r' + (a + n(1+x)) x upsilon_r] / ((n+1)(1+x)).
    """
    n, a = _exact(params)

    def build() -> List[RatFunc]:
        out = [RatFunc.const(1)]
        denom = (n + 1) * ONE_PLUS_X
        for r in range(r_max):
            prev = out[r]
            nxt = X * ONE_PLUS_X ** 2 * rf_derive(prev) + (a + n * ONE_PLUS_X) * X * prev
            out.append(nxt / denom)
        return out

    return _cached("upsilon", params, r_max, build)


def mu_sym(r_max: int, params: OperatorParams) -> MomentTable:
    """
    mu_{r+1} = [x(1+x)^2 mu_r' + (ax - x(1+x)) mu_r + r x(1+x)^2 mu_{r-1}] / ((n+1)(1+x)).

    The (ax - x(1+x)) factor comes from k - nx = (n+1)(k/(n+1) - x) + x; with
    it the recurrence starts correctly at r = 0.
    """
    n, a = _exact(params)

    def build() -> List[RatFunc]:
        out = [RatFunc.const(1)]
        denom = (n + 1) * ONE_PLUS_X
        drift = a * X - X * ONE_PLUS_X
        for r in range(r_max):
            nxt = X * ONE_PLUS_X ** 2 * rf_derive(out[r]) + drift * out[r]
            if r >= 1:
                nxt = nxt + r * X * ONE_PLUS_X ** 2 * out[r - 1]
            out.append(nxt / denom)
        return out

    return _cached("mu", params, r_max, build)


def mu_from_upsilon(r_max: int, params: OperatorParams) -> List[RatFunc]:
    """Binomial expansion mu_r = sum_j C(r,j) (-x)^{r-j} upsilon_j; cross-check for mu_sym."""
    ups = upsilon_sym(r_max, params)
    return [
        sum(
            (math.comb(r, j) * (-X) ** (r - j) * ups[j] for j in range(r + 1)),
            RatFunc(),
        )
        for r in range(r_max + 1)
    ]


def mu_star_sym(r_max: int, params: OperatorParams) -> MomentTable:
    """mu*_r = n^{-r} sum_j C(r,j) x^{r-j} (n+1)^j mu_j (nodes k/n)."""
    n, _ = _exact(params)
    mu = mu_sym(r_max, params)

    def build() -> List[RatFunc]:
        out = []
        for r in range(r_max + 1):
            acc = RatFunc()
            for j in range(r + 1):
                acc = acc + math.comb(r, j) * (n + 1) ** j * X ** (r - j) * mu[j]
            out.append(acc / Fraction(n) ** r)
        return out

    return _cached("mu_star", params, r_max, build)


def kantorovich_moment_sym(r_max: int, params: OperatorParams) -> MomentTable:
    """T_r = 1/(r+1) sum_{j<=r} C(r+1,j) (n+1)^{-(r-j)} upsilon_j."""
    n, _ = _exact(params)
    ups = upsilon_sym(r_max, params)

    def build() -> List[RatFunc]:
        out = []
        for r in range(r_max + 1):
            acc = RatFunc()
            for j in range(r + 1):
                acc = acc + Fraction(math.comb(r + 1, j), (n + 1) ** (r - j)) * ups[j]
            out.append(acc / (r + 1))
        return out

    return _cached("T", params, r_max, build)


def kantorovich_central_sym(r_max: int, params: OperatorParams) -> MomentTable:
    """u_r = 1/(r+1) sum_{nu=1}^{r+1} C(r+1,nu) (n+1)^{-(nu-1)} mu_{r+1-nu}."""
    n, _ = _exact(params)
    mu = mu_sym(r_max, params)

    def build() -> List[RatFunc]:
        out = []
        for r in range(r_max + 1):
            acc = RatFunc()
            for nu in range(1, r + 2):
                acc = acc + Fraction(math.comb(r + 1, nu), (n + 1) ** (nu - 1)) * mu[r + 1 - nu]
            out.append(acc / (r + 1))
        return out

    return _cached("u", params, r_max, build)


def first_moment_shift(params: OperatorParams) -> RatFunc:
    """b = -x + ax/(1+x) + 1/2, so that u_1 = b/(n+1)."""
    _, a = _exact(params)
    return -X + a * X / ONE_PLUS_X + Fraction(1, 2)


def gamma_sym(params: OperatorParams) -> RatFunc:
    """gamma = K((t-x)^2; x) + (K(t-x; x))^2 = u_2 + b^2/(n+1)^2."""
    n, _ = _exact(params)
    u2 = kantorovich_central_sym(2, params)[2]
    return u2 + first_moment_shift(params) ** 2 / (n + 1) ** 2


_BUILDERS: Dict[str, Callable[[int, OperatorParams], MomentTable]] = {
    "upsilon": upsilon_sym,
    "mu": mu_sym,
    "mu_star": mu_star_sym,
    "T": kantorovich_moment_sym,
    "u": kantorovich_central_sym,
}


def moment_table(family: str, r_max: int, params: OperatorParams) -> MomentTable:
    if family not in _BUILDERS:
        raise ConfigError(f"unknown moment family {family!r}; expected one of {', '.join(FAMILIES)}")
    return _BUILDERS[family](r_max, params)


# ---------- displayed closed forms ----------

def closed_forms(params: OperatorParams) -> Dict[str, RatFunc]:
    """Closed forms written out by hand; golden values for the recurrences."""
    n, a = _exact(params)
    A = a * X / ONE_PLUS_X
    d1, d2 = Fraction(1, n + 1), Fraction(1, (n + 1) ** 2)
    return {
        "upsilon0": RatFunc.const(1),
        "upsilon1": (n * X + A) * d1,
        "mu0": RatFunc.const(1),
        "mu1": (-X + A) * d1,
        "T0": RatFunc.const(1),
        "T1": (n * X + A + Fraction(1, 2)) * d1,
        "T2": (
            n ** 2 * X ** 2
            + n * (X ** 2 + 2 * X + 2 * a * X ** 2 / ONE_PLUS_X)
            + A ** 2 + 2 * A + Fraction(1, 3)
        ) * d2,
        "u0": RatFunc.const(1),
        "u1": (-X + A + Fraction(1, 2)) * d1,
        "u2": (
            n * X * (X + 1) - X * (1 - X) + A * (A + 2 * (1 - X)) + Fraction(1, 3)
        ) * d2,
        "gamma": (
            (n + 2) * X ** 2 + (n - 2) * X + 2 * A ** 2
            - 4 * a * X ** 2 / ONE_PLUS_X + 3 * A + Fraction(7, 12)
        ) * d2,
    }


def recurrence_forms(params: OperatorParams) -> Dict[str, RatFunc]:
    ups = upsilon_sym(1, params)
    mu = mu_sym(1, params)
    T = kantorovich_moment_sym(2, params)
    u = kantorovich_central_sym(2, params)
    return {
        "upsilon0": ups[0], "upsilon1": ups[1],
        "mu0": mu[0], "mu1": mu[1],
        "T0": T[0], "T1": T[1], "T2": T[2],
        "u0": u[0], "u1": u[1], "u2": u[2],
        "gamma": gamma_sym(params),
    }


def golden_mismatches(params: OperatorParams) -> List[str]:
    """Names whose recurrence value differs from the closed form (empty = all equal)."""
    golden, computed = closed_forms(params), recurrence_forms(params)
    return [name for name in golden if golden[name] != computed[name]]


# ---------- asymptotics in n ----------

def order_exponent(family: str, r: int, a, x0: float, n_values: Sequence[int]) -> LeadingOrder:
    """Ratio-test exponent of the r-th moment of a family at x0 as n doubles."""
    seq = [(n, moment_table(family, r, OperatorParams(n=n, a=a))[r]) for n in n_values]
    return rf_leading_order(seq, x0)


@dataclass(frozen=True)
class FirstOrderCoefficient:
    family: str
    r: int
    x: float
    values: Tuple[Tuple[int, float], ...]
    limit_estimate: float


def first_order_coefficients(family: str, r: int, a, x: float, n_values: Sequence[int]) -> FirstOrderCoefficient:
    """
    n·(moment_{n,r}(x) - x^r) for the raw families, evaluated exactly, plus
    the extrapolated limit assuming L_n = L + c/n + ...
    """
    if family not in ("upsilon", "T"):
        raise ConfigError(f"first-order coefficients are defined for raw families, got {family!r}")
    if len(n_values) < 2:
        raise ConfigError("need at least two n values")
    xq = Fraction(x)
    values = []
    for n in sorted(n_values):
        m = moment_table(family, r, OperatorParams(n=n, a=a)).evaluate(r, xq)
        values.append((n, float(n * (m - xq ** r))))
    (n1, l1), (n2, l2) = values[-2], values[-1]
    limit = (n2 * l2 - n1 * l1) / (n2 - n1)
    return FirstOrderCoefficient(family=family, r=r, x=float(x), values=tuple(values), limit_estimate=limit)


def voronovskaja_limit_sym(r: int, a) -> RatFunc:
    """
    lim n·(T_{n,r} - x^r) as an exact RatFunc.

    P(n) = (n+1)^r (T_{n,r} - x^r) is a polynomial of degree r-1 in n, and
    the limit is its leading coefficient: the (r-1)-th forward difference
    over n = 1..r divided by (r-1)!.
    """
    if r < 0:
        raise ConfigError(f"r must be >= 0, got {r}")
    if r == 0:
        return RatFunc()
    samples = [
        (n + 1) ** r * (kantorovich_moment_sym(r, OperatorParams(n=n, a=a))[r] - X ** r)
        for n in range(1, r + 1)
    ]
    diff = RatFunc()
    for i, p in enumerate(samples):
        diff = diff + (-1) ** (r - 1 - i) * math.comb(r - 1, i) * p
    return diff / math.factorial(r - 1)
