# services/kantorovich/commands/converge.py
import logging
from typing import Dict, List

from core.analysis import degree_of_approximation, rate_fit, sup_error
from core.catalog import Catalog
from core.errors import ConfigError
from schemas.analysis import GridSpec
from schemas.params import OperatorParams
from schemas.report import Report
from schemas.run_config import RunConfig

logger = logging.getLogger(__name__)

NAME = "converge"
HELP = "sup errors over a grid and their fitted rate n^-s (derivatives with --r)"
DEFAULTS: Dict[str, str] = {
    "functions": "exp_neg",
    "n": "64,128,256,512,1024",
    "a": "0",
    "grid": "0.25:4:16",
    "r": "0",
}


def add_arguments(parser) -> None:
    parser.add_argument("--r", default=None, help="derivative order 0..3")


def _grid(config: RunConfig) -> GridSpec:
    if config.grid is not None:
        return config.grid
    xs = config.xs()
    if len(xs) < 2:
        raise ConfigError("converge needs --grid or at least two --x values")
    return GridSpec(x_min=min(xs), x_max=max(xs), points=len(xs))


def run(config: RunConfig, catalog: Catalog) -> Report:
    r = config.option("r", 0, int)
    grid = _grid(config)
    policy = config.policy()
    rows: List[Dict] = []
    for ident in config.functions:
        f = catalog.get(ident)
        for a in config.a_values:
            if r == 0:
                sups = [(n, sup_error(f, OperatorParams(n=n, a=a), grid, policy)) for n in sorted(config.n_values)]
                fit = rate_fit(sups)
            else:
                sups, fit = degree_of_approximation(
                    f, a, r, (grid.x_min, grid.x_max), config.n_values, policy, points=grid.points
                )
            logger.info(f"✓ {ident} a={a} r={r}: rate n^-{fit.exponent:.3f} (residual {fit.residual:.2e})")
            for n, err in sups:
                rows.append({
                    "function": ident,
                    "a": float(a),
                    "r": r,
                    "n": n,
                    "sup_error": err,
                    "rate_exponent": fit.exponent,
                    "rate_constant": fit.constant,
                    "rate_residual": fit.residual,
                })
    return Report(command=NAME, config=config.describe(), rows=rows)
