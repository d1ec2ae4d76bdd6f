# services/kantorovich/commands/selftest.py
"""
Full invariant suite. --x / --grid replace the standard x values of the
grid-based checks and --tail-tol their truncation; --only picks checks by name.
"""
from typing import Dict

from core.catalog import Catalog
from core.config_file import split_list
from core.selftest import SelftestInputs, run_selftest
from schemas.report import Report
from schemas.run_config import RunConfig

NAME = "selftest"
HELP = "run the full invariant suite"
DEFAULTS: Dict[str, str] = {}


def add_arguments(parser) -> None:
    parser.add_argument("--only", default=None, help="comma-separated check names")


def inputs_from(config: RunConfig) -> SelftestInputs:
    defaults = SelftestInputs()
    xs = config.xs()
    return SelftestInputs(
        x_values=tuple(xs) if xs else defaults.x_values,
        policy=config.policy() if config.tail_tol is not None else None,
    )


def run(config: RunConfig, catalog: Catalog) -> Report:
    only = split_list(config.option("only", "")) or None
    report = run_selftest(catalog, inputs_from(config), only)
    return report.model_copy(update={"config": config.describe()})
