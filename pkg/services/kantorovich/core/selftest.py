# services/kantorovich/core/selftest.py
"""
Named invariant checks run by `main.py selftest`.

Each check returns (ok, detail). A check that raises counts as failed with
the error as its detail; the remaining checks still run.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from core import analysis
from core.basis import weight_row
from core.bv import bv_bound, bv_bound_sweep, bv_check, check_kernel_tails, is_non_increasing, remark_threshold
from core.catalog import BV_CATALOG, Catalog
from core.errors import ConfigError, LabError
from core.moments import CENTRAL_FAMILIES, golden_mismatches, kantorovich_moment_sym, order_exponent
from core.operators import kantorovich_eval
from schemas.analysis import BVBoundParams, GridSpec
from schemas.params import OperatorParams, TruncationPolicy
from schemas.report import Report

logger = logging.getLogger(__name__)

CheckResult = Tuple[bool, str]

STANDARD_N = (1, 4, 16, 64, 256)
STANDARD_A = (0.0, 0.5, 1.0, 3.0)
STANDARD_X = (0.0, 0.1, 1.0, 5.0, 20.0)

GOLDEN_PARAMS = (
    (1, Fraction(0)),
    (4, Fraction(1)),
    (7, Fraction(1, 3)),
    (12, Fraction(5, 2)),
    (33, Fraction(7, 4)),
)
GOLDEN_T1 = {"num": ["1/10", "11/10", "4/5"], "pole_order": 1}

ORDER_N = (256, 512, 1024, 2048)
RATE_N = (64, 128, 256, 512, 1024)
# t^6 against the tail certificate needs a far smaller dropped mass than the default
MOMENT_POLICY = TruncationPolicy(tail_mass_tol=1e-30, max_terms=60000)

@dataclass(frozen=True)
class SelftestInputs:
    """x values and truncation for the grid-based checks; --x, --grid and --tail-tol replace them."""
    x_values: Tuple[float, ...] = STANDARD_X
    policy: Optional[TruncationPolicy] = None

    @property
    def moment_policy(self) -> TruncationPolicy:
        if self.policy is None:
            return MOMENT_POLICY
        return TruncationPolicy(tail_mass_tol=self.policy.tail_mass_tol, max_terms=MOMENT_POLICY.max_terms)


CheckFn = Callable[[Catalog, SelftestInputs], CheckResult]
_CHECKS: List[Tuple[str, CheckFn]] = []


def check(name: str):
    def register(fn: CheckFn):
        _CHECKS.append((name, fn))
        return fn
    return register


def _standard_grid(inputs: SelftestInputs):
    return [(n, a, x) for n in STANDARD_N for a in STANDARD_A for x in inputs.x_values]


# ========== Basis and operator ==========

@check("partition_of_unity")
def _partition(catalog: Catalog, inputs: SelftestInputs) -> CheckResult:
    worst = max(
        abs(row.total + row.tail_mass - 1.0)
        for row in (weight_row(OperatorParams(n=n, a=a), x, inputs.policy) for n, a, x in _standard_grid(inputs))
    )
    return worst <= 1e-12, f"max |sum W + tail - 1| = {worst:.2e}"


@check("positivity")
def _positivity(catalog: Catalog, inputs: SelftestInputs) -> CheckResult:
    kink, inv, one = catalog.get("abs_kink"), catalog.get("inv1p"), catalog.get("one")
    bad = []
    for n, a, x in _standard_grid(inputs):
        params = OperatorParams(n=n, a=a)
        if kantorovich_eval(kink, params, x, inputs.policy) < 0:
            bad.append(f"K|t-1| < 0 at {params.label()}, x={x}")
        if kantorovich_eval(inv, params, x, inputs.policy) > kantorovich_eval(one, params, x, inputs.policy) * (1 + 1e-14):
            bad.append(f"K(1/(1+t)) > K(1) at {params.label()}, x={x}")
    return not bad, "; ".join(bad[:3]) or "K f >= 0 and K monotone on the standard grid"


# ========== Moments ==========

@check("golden_closed_forms")
def _golden(catalog: Catalog, inputs: SelftestInputs) -> CheckResult:
    bad = []
    for n, a in GOLDEN_PARAMS:
        bad += [f"{name}@n={n},a={a}" for name in golden_mismatches(OperatorParams(n=n, a=a))]
    t1 = kantorovich_moment_sym(1, OperatorParams(n=4, a=1))[1].to_json()
    if t1 != GOLDEN_T1:
        bad.append(f"T1@n=4,a=1 = {t1}")
    return not bad, ", ".join(bad) or f"{len(GOLDEN_PARAMS)} parameter pairs agree exactly"


@check("symbolic_numeric")
def _symbolic_numeric(catalog: Catalog, inputs: SelftestInputs) -> CheckResult:
    worst, where = 0.0, ""
    for n in STANDARD_N:
        for a in STANDARD_A:
            params = OperatorParams(n=n, a=a)
            table = kantorovich_moment_sym(6, params)
            for x in inputs.x_values:
                for r in range(7):
                    exact = float(table.evaluate(r, Fraction(x)))
                    numeric = kantorovich_eval(catalog.get(_monomial_id(r)), params, x, inputs.moment_policy)
                    rel = abs(numeric - exact) / max(abs(exact), 1e-300)
                    if rel > worst:
                        worst, where = rel, f"r={r}, {params.label()}, x={x}"
    return worst <= 1e-10, f"max relative gap {worst:.2e} ({where})"


def _monomial_id(r: int) -> str:
    return {0: "one", 1: "t"}.get(r, f"t{r}")


@check("order_laws")
def _order_laws(catalog: Catalog, inputs: SelftestInputs) -> CheckResult:
    bad, seen = [], []
    for family in CENTRAL_FAMILIES:
        for r in (2, 3, 4):
            exponent = order_exponent(family, r, 1, 1.0, ORDER_N).exponent
            seen.append(f"{family}_{r}={exponent:.3f}")
            if abs(exponent - (r + 1) // 2) > 0.05:
                bad.append(seen[-1])
    return not bad, ", ".join(bad or seen)


# ========== Analysis ==========

@check("voronovskaja_exact")
def _voronovskaja_exact(catalog: Catalog, inputs: SelftestInputs) -> CheckResult:
    bad = [f"t^{p}, a={a}" for p in range(1, 7) for a in (0, 1, Fraction(5, 2)) if not analysis.voronovskaja_identity(p, a)]
    return not bad, ", ".join(bad) or "exact limits match for t..t^6"


@check("voronovskaja_numeric")
def _voronovskaja_numeric(catalog: Catalog, inputs: SelftestInputs) -> CheckResult:
    f = catalog.get("t2")
    bad = []
    for a in (0.0, 1.0):
        for x in (0.5, 1.0, 2.0):
            A = a * x / (1 + x)
            ell = 2 * x - x * x + 2 * A * x
            c = A * A + 2 * A + 1 / 3 - x * x
            record = analysis.voronovskaja_check(f, a, x, 0, RATE_N)
            for row in record.rows:
                allowed = abs(c - 2 * ell) / row.n + (abs(ell) + 1) / row.n ** 2
                if row.abs_diff > allowed:
                    bad.append(f"a={a}, x={x}, n={row.n}: {row.abs_diff:.3e} > {allowed:.3e}")
    return not bad, "; ".join(bad[:3]) or "|L_n - limit| within the exact 1/n coefficient"


@check("weighted_majorants")
def _weighted_majorants(catalog: Catalog, inputs: SelftestInputs) -> CheckResult:
    records = [
        rec
        for a in (0.0, 1.0, 3.0)
        for n in (16, 64, 256, 1024)
        for rec in analysis.monomial_norm_records(OperatorParams(n=n, a=a))
    ]
    bad = [f"{r.check}@n={r.n},a={r.a}" for r in records if r.violated]
    return not bad, ", ".join(bad) or f"{len(records)} majorant records hold"


@check("statistical_threshold")
def _statistical(catalog: Catalog, inputs: SelftestInputs) -> CheckResult:
    threshold = analysis.monomial_threshold(1, 1.0, 0.01)
    curve = analysis.stat_density(analysis.monomial_norm_sequence(1, 1, 400), 0.01, threshold)
    ok = threshold == 349 and curve.respects_threshold
    return ok, f"threshold {threshold}, last member {curve.last_member}, final density {curve.density[-1]:.4f}"


@check("modulus_invariants")
def _modulus(catalog: Catalog, inputs: SelftestInputs) -> CheckResult:
    grid = GridSpec(x_min=0.0, x_max=10.0, points=2)
    eta = 10.0 / 2000
    bad = []
    for ident in ("sin", "sqrt", "exp_neg", "t2"):
        f = catalog.get(ident)
        deltas = [eta * j for j in (1, 2, 5, 10, 40)]
        reports = [analysis.modulus(f, d, grid) for d in deltas]
        weighted = [rep.omega_weighted for rep in reports]
        if any(later < earlier for earlier, later in zip(weighted, weighted[1:])):
            bad.append(f"{ident}: Omega not monotone")
        if any(rep.omega < 0 or rep.omega2 < 0 for rep in reports):
            bad.append(f"{ident}: negative modulus")
        base = deltas[1]
        omega_base = analysis.modulus(f, base, grid, "weighted").omega_weighted
        for m in (2, 3):
            if analysis.modulus(f, m * base, grid, "weighted").omega_weighted > m * omega_base * (1 + 1e-12):
                bad.append(f"{ident}: Omega({m}d) > {m}·Omega(d)")
        lam = 2.5
        if analysis.modulus(f, lam * base, grid, "weighted").omega_weighted > (1 + lam) * omega_base * (1 + 1e-12):
            bad.append(f"{ident}: Omega({lam}d) > {1 + lam}·Omega(d)")
    return not bad, "; ".join(bad) or "monotone, subadditive, lambda-scaling on the lattice"


@check("auxiliary_bound")
def _auxiliary(catalog: Catalog, inputs: SelftestInputs) -> CheckResult:
    records = [
        analysis.check_auxiliary_bound(catalog.get(ident), OperatorParams(n=n, a=a), x)
        for ident in ("exp_neg", "sin", "inv1p")
        for n in (16, 256)
        for a in (0.0, 1.0)
        for x in (0.5, 2.0)
    ]
    bad = [f"{r.function}@n={r.n},a={r.a},x={r.x}" for r in records if r.violated]
    return not bad, ", ".join(bad) or f"{len(records)} records hold"


@check("rate_fits")
def _rates(catalog: Catalog, inputs: SelftestInputs) -> CheckResult:
    grid = GridSpec.parse("0.25:4:16")
    sups = [(n, analysis.sup_error(catalog.get("exp_neg"), OperatorParams(n=n, a=0), grid)) for n in RATE_N]
    smooth = analysis.rate_fit(sups).exponent
    _, fit = analysis.degree_of_approximation(catalog.get("t3"), 0, 1, (0.5, 1.5), RATE_N, points=3)
    ok = abs(smooth - 1) <= 0.1 and abs(fit.exponent - 1) <= 0.15
    return ok, f"exp_neg s={smooth:.3f}, D(t^3) s={fit.exponent:.3f}"


@check("bound_suite")
def _suite(catalog: Catalog, inputs: SelftestInputs) -> CheckResult:
    result = analysis.bound_suite(catalog)
    constants = ", ".join(f"{c.name}={c.value:.4g}" for c in result.constants)
    bad = [f"{r.check}:{r.function}@n={r.n},a={r.a},x={r.x}" for r in result.violations]
    return not bad, "; ".join(bad[:5]) or f"{len(result.records)} checks hold ({constants})"


# ========== BV ==========

@check("bv_estimate")
def _bv(catalog: Catalog, inputs: SelftestInputs) -> CheckResult:
    bad, checked = [], 0
    for ident in BV_CATALOG:
        f = catalog.get(ident)
        for x in (0.5, 1.0, 2.0):
            n0 = remark_threshold(0, x, 2.0)
            valid = [n for n in (256, 1024, 4096) if n >= n0]
            for n in valid:
                record = bv_check(f, OperatorParams(n=n, a=0), BVBoundParams(n=n, x=x, lambda_=2.0))
                checked += 1
                if record.violated or record.bound_k0_double < record.bound_skip_k0:
                    bad.append(f"{ident}@n={n},x={x}")
            sweep = bv_bound_sweep(f, 0, x, valid, 2.0)
            if not is_non_increasing([skip for _, skip, _ in sweep]):
                bad.append(f"{ident}@x={x}: bound increases with n")
    linear = bv_bound(catalog.get("t"), OperatorParams(n=99, a=0), BVBoundParams(n=99, x=1.0)).skip_k0
    if not math.isclose(linear, 0.005, rel_tol=1e-12):
        bad.append(f"f=t, n=99, x=1: bound {linear!r} != 0.005")
    return not bad, ", ".join(bad) or f"{checked} records hold under both k=0 readings"


@check("kernel_tails")
def _kernel_tails(catalog: Catalog, inputs: SelftestInputs) -> CheckResult:
    records = [
        rec
        for x in (0.5, 1.0, 2.0)
        for n in (256, 1024, 4096)
        for rec in check_kernel_tails(OperatorParams(n=n, a=0), x, 2.0, [x / 2, x / 4], [2 * x, 3 * x])
    ]
    bad = [f"{r.check}@n={r.n},x={r.x}" for r in records if r.violated]
    return not bad, ", ".join(bad) or f"{len(records)} tail records hold"


def check_names() -> List[str]:
    return [name for name, _ in _CHECKS]


def run_selftest(
    catalog: Catalog,
    inputs: Optional[SelftestInputs] = None,
    only: Optional[Sequence[str]] = None,
) -> Report:
    """
    Run every registered check, or the ones named in `only`.

    Raises:
        ConfigError: `only` names an unknown check
    """
    inputs = inputs or SelftestInputs()
    unknown = sorted(set(only or ()) - set(check_names()))
    if unknown:
        raise ConfigError(f"unknown selftest checks {unknown}; known: {', '.join(check_names())}")
    rows: List[Dict] = []
    violations: List[str] = []
    for name, fn in _CHECKS:
        if only and name not in only:
            continue
        logger.info(f"selftest: {name}")
        try:
            ok, detail = fn(catalog, inputs)
        except LabError as e:
            ok, detail = False, f"{type(e).__name__}: {e}"
        except Exception as e:
            logger.exception(f"selftest check {name} crashed")
            ok, detail = False, f"{type(e).__name__}: {e}"
        rows.append({"check": name, "ok": bool(ok), "detail": detail})
        if ok:
            logger.info(f"✓ {name}: {detail}")
        else:
            logger.warning(f"✗ {name}: {detail}")
            violations.append(name)
    return Report(command="selftest", rows=rows, violations=violations)
