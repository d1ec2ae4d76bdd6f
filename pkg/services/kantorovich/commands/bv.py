# services/kantorovich/commands/bv.py
import logging
from typing import Dict, List

from core.bv import bv_bound_sweep, bv_check, check_kernel_tails, is_non_increasing, remark_threshold
from core.catalog import BV_CATALOG, Catalog
from core.errors import RemarkNotYetValid
from core.validation import validate_x_values
from schemas.analysis import BVBoundParams
from schemas.params import OperatorParams
from schemas.report import Report
from schemas.run_config import RunConfig
from settings import get_settings

logger = logging.getLogger(__name__)

NAME = "bv"
HELP = "rate estimate for functions whose derivative has bounded variation"
DEFAULTS: Dict[str, str] = {
    "functions": ",".join(BV_CATALOG),
    "n": "256,1024,4096",
    "a": "0",
    "x": "0.5,1,2",
}


def add_arguments(parser) -> None:
    parser.add_argument("--lambda", dest="lambda", default=None, help="lambda > 1 of the validity condition")


def run(config: RunConfig, catalog: Catalog) -> Report:
    lam = config.option("lambda", get_settings().bv_lambda, float)
    policy = config.policy()
    n_values = sorted(config.n_values)
    rows: List[Dict] = []
    violations: List[str] = []

    for a in config.a_values:
        for x in validate_x_values(config.xs(), positive=True):
            n0 = remark_threshold(a, x, lam)
            valid = [n for n in n_values if n >= n0]
            for ident in config.functions:
                f = catalog.get(ident)
                for n in n_values:
                    params = OperatorParams(n=n, a=a)
                    try:
                        record = bv_check(f, params, BVBoundParams(n=n, x=x, lambda_=lam), policy)
                    except RemarkNotYetValid as e:
                        logger.info(f"skip {ident} n={n} x={x}: {e}")
                        rows.append({"kind": "bv", "function": ident, "n": n, "a": float(a), "x": x,
                                     "lam": lam, "n0": e.n0, "status": "skipped"})
                        continue
                    rows.append({"kind": "bv", **record.to_row(), "status": "violated" if record.violated else "ok"})
                    if record.violated:
                        violations.append(
                            f"bv {ident} n={n} a={a} x={x}: {record.lhs!r} > {record.bound_skip_k0!r}"
                        )
                if len(valid) >= 2:
                    sweep = bv_bound_sweep(f, a, x, valid, lam)
                    if not is_non_increasing([skip for _, skip, _ in sweep]):
                        violations.append(f"bv bound of {ident} increases with n at a={a}, x={x}")

            for n in valid:
                for record in check_kernel_tails(OperatorParams(n=n, a=a), x, lam, [x / 2], [2 * x], policy):
                    rows.append({"kind": record.check, **record.to_row()})
                    if record.violated:
                        violations.append(f"{record.check} n={n} a={a} x={x}: {record.actual!r} > {record.bound!r}")

    logger.info(f"✓ bv: {len(rows)} rows, {len(violations)} violations")
    return Report(command=NAME, config=config.describe(), rows=rows, violations=violations)
