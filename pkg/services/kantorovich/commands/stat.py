# services/kantorovich/commands/stat.py
"""
Statistical (C1) density of {k : b_k >= epsilon}.

Without --f the sequence is b_k = ||K_k e_i - e_i||_rho, whose majorant gives
an index past which no k may belong to the set. With --f it is the rho_alpha
norm of K_k f - f, sampled on --x / --grid when given and on [0, x_max_trunc]
otherwise. The e_i norms are exact sups over [0, inf) and take no x values.
"""
import logging
from typing import Dict, List

from core.analysis import monomial_norm_sequence, monomial_threshold, stat_density, weighted_alpha_norms
from core.catalog import Catalog
from core.errors import ConfigError
from schemas.records import DensityCurve
from schemas.report import Report
from schemas.run_config import RunConfig

logger = logging.getLogger(__name__)

NAME = "stat"
HELP = "density curves of {k : ||K_k f - f|| >= epsilon}"
DEFAULTS: Dict[str, str] = {"a": "1", "i": "1", "epsilon": "0.01", "alpha": "1"}

MONOMIAL_N = 400
FUNCTION_N = 64


def add_arguments(parser) -> None:
    parser.add_argument("--i", default=None, help="test function e_i, i in {0, 1, 2}")
    parser.add_argument("--N", dest="N", default=None, help="sequence length")
    parser.add_argument("--epsilon", default=None)
    parser.add_argument("--alpha", default=None, help="rho_alpha = 1 + x^(2+alpha) for --f sequences")


def _rows(label: str, a, bounds: List[float], curve: DensityCurve) -> List[Dict]:
    members = set(curve.members)
    return [
        {"sequence": label, "a": float(a), "n": k, "b_n": b, "member": k in members, "density": d}
        for k, (b, d) in enumerate(zip(bounds, curve.density), start=1)
    ]


def run(config: RunConfig, catalog: Catalog) -> Report:
    epsilon = config.option("epsilon", 0.01, float)
    if epsilon <= 0:
        raise ConfigError(f"epsilon must be > 0, got {epsilon}")
    rows: List[Dict] = []
    violations: List[str] = []
    described = config.describe()
    xs = config.xs() or None
    if xs and not config.functions:
        raise ConfigError("--x and --grid sample --f sequences; the e_i norms are exact sups over [0, inf)")

    for a in config.a_values:
        if config.functions:
            N = config.option("N", FUNCTION_N, int)
            alpha = config.option("alpha", 1.0, float)
            for ident in config.functions:
                f = catalog.get(ident)
                norms = weighted_alpha_norms(f, a, range(1, N + 1), alpha, policy=config.policy(), xs=xs)
                bounds = [b for _, b in norms]
                curve = stat_density(bounds, epsilon)
                rows += _rows(ident, a, bounds, curve)
                described[f"last_member[{ident},a={a}]"] = curve.last_member
        else:
            i = config.option("i", 1, int)
            N = config.option("N", MONOMIAL_N, int)
            threshold = monomial_threshold(i, float(a), epsilon)
            bounds = monomial_norm_sequence(i, a, N)
            curve = stat_density(bounds, epsilon, threshold)
            rows += _rows(f"e{i}", a, bounds, curve)
            described[f"threshold[e{i},a={a}]"] = threshold
            described[f"last_member[e{i},a={a}]"] = curve.last_member
            if N <= threshold:
                logger.warning(f"N={N} does not pass the threshold {threshold}; the density cannot reach 0 yet")
            if not curve.respects_threshold:
                violations.append(
                    f"e{i}, a={a}: b_{curve.last_member} >= {epsilon} past the threshold {threshold}"
                )
    logger.info(f"✓ stat: {len(rows)} rows, epsilon={epsilon}")
    return Report(command=NAME, config=described, rows=rows, violations=violations)
