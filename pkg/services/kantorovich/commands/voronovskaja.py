# services/kantorovich/commands/voronovskaja.py
import logging
from typing import Dict, List

from core.analysis import voronovskaja_check, voronovskaja_identity
from core.catalog import Catalog, monomial_power
from schemas.report import Report
from schemas.run_config import RunConfig

logger = logging.getLogger(__name__)

NAME = "voronovskaja"
HELP = "n·(D^r K_n f - f^(r)) against its Voronovskaja limit"
DEFAULTS: Dict[str, str] = {"functions": "t2", "n": "64,128,256,512,1024", "a": "0", "x": "1", "r": "0"}


def add_arguments(parser) -> None:
    parser.add_argument("--r", default=None, help="0 (values) or 1 (first derivatives)")


def run(config: RunConfig, catalog: Catalog) -> Report:
    r = config.option("r", 0, int)
    policy = config.policy()
    rows: List[Dict] = []
    violations: List[str] = []
    for ident in config.functions:
        f = catalog.get(ident)
        power = monomial_power(ident)
        for a in config.a_values:
            exact = None
            if power is not None and r == 0:
                exact = voronovskaja_identity(power, a)
                if not exact:
                    violations.append(f"exact limit of n·(T_n,{power} - x^{power}) differs from the expression at a={a}")
            for x in config.xs():
                record = voronovskaja_check(f, a, x, r, config.n_values, policy)
                decay = record.decay
                for row in record.to_rows():
                    row["decay_exponent"] = decay.exponent if decay else None
                    row["exact_identity"] = exact
                    rows.append(row)
    logger.info(f"✓ voronovskaja: {len(rows)} rows")
    return Report(command=NAME, config=config.describe(), rows=rows, violations=violations)
