# services/kantorovich/commands/bounds.py
"""
Every direct estimate over the validation grid, with the constants they only
assert to exist fitted beforehand on the calibration grid.
"""
import logging
from typing import Dict, List

from core.analysis import (
    CALIBRATION_A,
    CALIBRATION_N,
    CALIBRATION_X,
    VALIDATION_A,
    VALIDATION_N,
    VALIDATION_X,
    bound_suite,
)
from core.catalog import Catalog
from core.config_file import split_list
from schemas.report import Report
from schemas.run_config import RunConfig

logger = logging.getLogger(__name__)

NAME = "bounds"
HELP = "check the approximation inequalities with calibrated constants"


def _joined(values) -> str:
    return ",".join(repr(v) for v in values)


DEFAULTS: Dict[str, str] = {
    "n": _joined(VALIDATION_N),
    "a": _joined(VALIDATION_A),
    "x": _joined(VALIDATION_X),
    "b": "5",
}


def add_arguments(parser) -> None:
    parser.add_argument("--b", default=None, help="right end of the finite-interval estimate")
    parser.add_argument("--cal-n", dest="cal_n", default=None, help=f"calibration n (default {_joined(CALIBRATION_N)})")
    parser.add_argument("--cal-a", dest="cal_a", default=None, help=f"calibration a (default {_joined(CALIBRATION_A)})")
    parser.add_argument("--cal-x", dest="cal_x", default=None, help=f"calibration x (default {_joined(CALIBRATION_X)})")


def _calibration(config: RunConfig) -> Dict[str, List]:
    cal: Dict[str, List] = {}
    for key, field, cast in (("cal_n", "n_values", int), ("cal_a", "a_values", float), ("cal_x", "x_values", float)):
        values = config.option(key, None, lambda text, cast=cast: [cast(v) for v in split_list(text)])
        if values:
            cal[field] = values
    return cal


def run(config: RunConfig, catalog: Catalog) -> Report:
    calibration = _calibration(config)
    a_values = [float(a) for a in config.a_values]
    cal_pairs = {
        (n, float(a))
        for n in calibration.get("n_values", CALIBRATION_N)
        for a in calibration.get("a_values", CALIBRATION_A)
    }
    shared = sorted(cal_pairs & {(n, a) for n in config.n_values for a in a_values})
    if shared:
        logger.warning(f"calibration and validation grids share (n, a) pairs {shared}")

    result = bound_suite(
        catalog,
        n_values=config.n_values,
        a_values=a_values,
        x_values=config.xs(),
        b=config.option("b", 5.0, float),
        policy=config.policy(),
        calibration=calibration,
    )
    described = config.describe()
    for constant in result.constants:
        described[constant.name] = constant.value
        described[f"{constant.name}_required"] = constant.required
        for key, value in constant.extra.items():
            described[f"{constant.name}_{key}"] = value
    violations = [
        f"{r.check} {r.function} n={r.n} a={r.a} x={r.x}: {r.actual!r} > {r.bound!r}"
        for r in result.violations
    ]
    return Report(command=NAME, config=described, rows=[r.to_row() for r in result.records], violations=violations)
