# services/kantorovich/commands/moments.py
"""
Exact moment tables, the closed-form cross-check and (with --orders) the
ratio-test order laws of the central families.
"""
import logging
from fractions import Fraction
from typing import Dict, List

from core.catalog import Catalog
from core.moments import CENTRAL_FAMILIES, FAMILIES, golden_mismatches, moment_table, order_exponent
from core.ratcore import rf_eval
from schemas.params import OperatorParams
from schemas.report import Report
from schemas.run_config import RunConfig

logger = logging.getLogger(__name__)

NAME = "moments"
HELP = "symbolic moment tables of the basis and of K_n^a"
DEFAULTS: Dict[str, str] = {"n": "4", "a": "1", "family": "T", "rmax": "2", "format": "json"}

# Ratio test n values when fewer than three are given
ORDER_N = (256, 512, 1024, 2048)
ORDER_TOL = 0.05


def add_arguments(parser) -> None:
    parser.add_argument("--family", choices=FAMILIES, default=None)
    parser.add_argument("--rmax", default=None, help="highest moment order")
    parser.add_argument("--orders", action="store_const", const="true", default=None,
                        help="ratio-test exponents of the central families for r = 2..4")
    parser.add_argument("--at", default=None, help="x0 of the ratio test (default 1)")


def _tables(config: RunConfig) -> Report:
    family = config.option("family", "T")
    r_max = config.option("rmax", 2, int)
    rows: List[Dict] = []
    violations: List[str] = []
    for n in config.n_values:
        for a in config.a_values:
            params = OperatorParams(n=n, a=a)
            table = moment_table(family, r_max, params)
            for r, entry in enumerate(table.entries):
                row = {"family": family, "n": n, "a": str(params.a_exact), "r": r, **entry.to_json()}
                for x in config.xs():
                    row[f"x={x!r}"] = float(rf_eval(entry, Fraction(x)))
                rows.append(row)
            for name in golden_mismatches(params):
                violations.append(f"closed form {name} differs from its recurrence at {params.label()}")
    return Report(command=NAME, config=config.describe(), rows=rows, violations=violations)


def _orders(config: RunConfig) -> Report:
    x0 = config.option("at", 1.0, float)
    if len(config.n_values) >= 3:
        n_values = list(config.n_values)
    else:
        n_values = list(ORDER_N)
        logger.info(f"ratio test needs three n values; using {n_values}")
    rows: List[Dict] = []
    violations: List[str] = []
    for a in config.a_values:
        for family in CENTRAL_FAMILIES:
            for r in (2, 3, 4):
                order = order_exponent(family, r, a, x0, n_values)
                expected = (r + 1) // 2
                ok = abs(order.exponent - expected) <= ORDER_TOL
                rows.append({
                    "family": family,
                    "r": r,
                    "a": float(a),
                    "x0": x0,
                    "exponent": order.exponent,
                    "expected": expected,
                    "exponents": list(order.exponents),
                    "ok": ok,
                })
                if not ok:
                    violations.append(
                        f"{family}_{r} at a={a}: exponent {order.exponent:.4f}, expected {expected}"
                    )
    return Report(command=NAME, config=config.describe(), rows=rows, violations=violations)


def run(config: RunConfig, catalog: Catalog) -> Report:
    if config.option("orders") == "true":
        return _orders(config)
    return _tables(config)
