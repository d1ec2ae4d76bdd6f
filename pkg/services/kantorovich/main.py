"""
Kantorovich operator lab - command-line entry point.

Run:
python main.py eval --f exp_neg --n 64 --a 1 --x 1
python main.py moments --n 4 --a 1 --family T --rmax 2
python main.py selftest

Parameters are merged as: command defaults < --config file < flags. Settings
(KANTOROVICH_*) supply numerical defaults such as the tail tolerance and the
log level; they are not part of that chain.
Exit codes: 0 ok, 1 configuration error, 2 numerical failure, 3 bound violation.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from pydantic import ValidationError

from adapters.base import get_writer
from commands import COMMANDS
from core.catalog import Catalog
from core.config_file import parse_config_file, run_options, split_list, user_functions
from core.errors import ConfigError, LabError
from core.validation import coerce_format, validate_n_values
from schemas.analysis import GridSpec
from schemas.report import Report
from schemas.run_config import RunConfig
from settings import get_settings

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# Keys that map onto RunConfig fields; everything else becomes an option
FIELD_KEYS = ("functions", "n", "a", "x", "grid", "tail_tol", "format", "out")
IGNORED_KEYS = ("log_level",)
KEY_ALIASES = {"f": "functions", "function": "functions"}


class _Parser(argparse.ArgumentParser):
    """argparse that raises ConfigError instead of exiting."""

    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _common_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--f", "--functions", dest="functions", default=None, help="comma-separated function ids")
    common.add_argument("--n", default=None, help="comma-separated n values")
    common.add_argument("--a", default=None, help="comma-separated a values ('p/q' stays exact)")
    common.add_argument("--x", default=None, help="comma-separated x values")
    common.add_argument("--grid", default=None, help="x_min:x_max:points[:log]; replaces --x")
    common.add_argument("--tail-tol", dest="tail_tol", default=None, help="certified bound on the dropped weight mass")
    common.add_argument("--format", default=None, help="csv, json or xlsx")
    common.add_argument("--out", default=None, help="report file, or directory for <command>.<ext>")
    common.add_argument("--config", default=None, help="key = value run configuration file")
    common.add_argument("--log-level", dest="log_level", default=None)
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kantorovich", description="Generalized Baskakov-Kantorovich operator lab")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    common = _common_parser()
    for name, module in COMMANDS.items():
        command = sub.add_parser(name, help=module.HELP, parents=[common])
        module.add_arguments(command)
    return parser


def _normalize(entries: Dict[str, str]) -> Dict[str, str]:
    out = {}
    for key, value in entries.items():
        key = KEY_ALIASES.get(key, key).replace("-", "_")
        out[key] = value
    return out


def merge_values(command: str, cli: Dict[str, str], file_entries: Optional[Dict[str, str]] = None) -> Dict[str, str]:
    """Command defaults, then the config file, then flags; later wins."""
    values = dict(COMMANDS[command].DEFAULTS)
    values.update(_normalize(run_options(file_entries or {})))
    values.update({k: v for k, v in cli.items() if v is not None})
    return values


def _parse_list(key: str, raw: str, cast) -> List:
    try:
        return [cast(item) for item in split_list(raw)]
    except ValueError as e:
        raise ConfigError(f"{key}: cannot parse {raw!r} ({e})")


def build_config(command: str, values: Dict[str, str], catalog: Catalog) -> RunConfig:
    """
    Raises:
        ConfigError: any malformed value (pydantic errors included)
    """
    data: Dict = {"command": command}
    if values.get("functions"):
        data["functions"] = split_list(values["functions"])
    if values.get("n"):
        data["n_values"] = validate_n_values(_parse_list("n", values["n"], int))
    if values.get("a"):
        data["a_values"] = split_list(values["a"])
    if values.get("x"):
        data["x_values"] = _parse_list("x", values["x"], float)
    if values.get("grid"):
        try:
            data["grid"] = GridSpec.parse(values["grid"])
        except (ValueError, ValidationError) as e:
            raise ConfigError(f"grid: {e}")
    if values.get("tail_tol"):
        data["tail_tol"] = _parse_list("tail_tol", values["tail_tol"], float)[0]
    data["format"] = coerce_format(values.get("format", "csv"))
    if values.get("out"):
        data["out"] = values["out"]
    data["options"] = {
        k: str(v) for k, v in values.items() if k not in FIELD_KEYS and k not in IGNORED_KEYS
    }
    try:
        return RunConfig.model_validate(data, context={"catalog": catalog})
    except ValidationError as e:
        raise ConfigError(f"invalid run configuration: {e}")


def emit(result, config: RunConfig) -> int:
    """Write a report (or print plain text) and map violations to exit 3."""
    if isinstance(result, str):
        if config.out:
            path = Path(config.out)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(result, encoding="utf-8")
            logger.info(f"✓ wrote {path}")
        else:
            sys.stdout.write(result)
        return 0

    report: Report = result
    writer = get_writer(config.format)
    writer.write(report, config.output_path(writer.extension))
    if report.violations:
        for message in report.violations:
            logger.warning(f"✗ {message}")
        logger.error(f"{len(report.violations)} violation(s) in {report.command}")
        return 3
    logger.info(f"✓ {report.command}: {len(report.rows)} rows, no violations")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    settings = get_settings()
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=(args.log_level or settings.log_level).upper(), format=LOG_FORMAT)

        entries = parse_config_file(args.config) if args.config else {}
        file_level = run_options(entries).get("log_level")
        if file_level and not args.log_level:
            logging.getLogger().setLevel(file_level.upper())

        catalog = Catalog(user_functions(entries))
        cli = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
        config = build_config(args.command, merge_values(args.command, cli, entries), catalog)
        logger.info(f"🔧 {args.command}: {config.describe()}")
        return emit(COMMANDS[args.command].run(config, catalog), config)
    except ValidationError as e:
        logger.error(f"invalid parameters: {e}")
        return ConfigError.exit_code
    except LabError as e:
        logger.error(f"{type(e).__name__}: {e.detail}")
        return e.exit_code
    except Exception:
        logger.exception("unexpected failure")
        return 2


if __name__ == "__main__":
    sys.exit(main())
