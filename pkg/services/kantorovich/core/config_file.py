# services/kantorovich/core/config_file.py
"""
Key-value run configuration files.

One `key = value` per line, `#` starts a comment. Run options use plain
keys (n, a, grid, functions, tail_tol, format, out, ...). User functions are
declared with dotted keys:

    function.ramp.kind = piecewise_linear
    function.ramp.points = 0:0, 1:1, 3:1
    function.ramp.tail_slope = 0

    function.kink2.kind = abs
    function.kink2.center = 2
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, List, Mapping, Tuple, Union

from core.catalog import abs_shift, piecewise_linear
from core.errors import ConfigError
from models.function_spec import FunctionSpec

logger = logging.getLogger(__name__)

FUNCTION_PREFIX = "function."


def parse_config_text(text: str, *, source: str = "<config>") -> Dict[str, str]:
    entries: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in entries:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        entries[key] = value
    return entries


def parse_config_file(path: Union[str, Path]) -> Dict[str, str]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}")
    logger.info(f"🔧 loading run config from {path}")
    return parse_config_text(text, source=str(path))


def split_list(value: str) -> List[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def run_options(entries: Mapping[str, str]) -> Dict[str, str]:
    return {k: v for k, v in entries.items() if not k.startswith(FUNCTION_PREFIX)}


def _parse_points(ident: str, value: str) -> List[Tuple[float, float]]:
    points = []
    for item in split_list(value):
        try:
            t, v = item.split(":")
            points.append((float(t), float(v)))
        except ValueError:
            raise ConfigError(f"function {ident}: bad point {item!r} (expected t:value)")
    return points


def user_functions(entries: Mapping[str, str]) -> List[FunctionSpec]:
    """Build FunctionSpecs from `function.<id>.<field>` keys, in id order."""
    grouped: Dict[str, Dict[str, str]] = {}
    for key, value in entries.items():
        if not key.startswith(FUNCTION_PREFIX):
            continue
        rest = key[len(FUNCTION_PREFIX):]
        if "." not in rest:
            raise ConfigError(f"function key {key!r} must look like function.<id>.<field>")
        ident, fld = rest.split(".", 1)
        grouped.setdefault(ident, {})[fld] = value

    specs = []
    for ident in sorted(grouped):
        fields = grouped[ident]
        kind = fields.get("kind")
        try:
            if kind == "piecewise_linear":
                specs.append(piecewise_linear(
                    ident,
                    _parse_points(ident, fields.get("points", "")),
                    tail_slope=float(fields.get("tail_slope", "0")),
                ))
            elif kind == "abs":
                specs.append(abs_shift(float(fields["center"]), ident))
            else:
                raise ConfigError(f"function {ident}: kind must be piecewise_linear or abs, got {kind!r}")
        except (KeyError, ValueError) as e:
            raise ConfigError(f"function {ident}: incomplete or invalid declaration ({e})")
    return specs
