"""
CSV report writer: header row, RFC-4180 quoting, floats written with repr
so values survive a round trip unchanged.
"""
import csv
import logging
from pathlib import Path
from typing import Any

from schemas.report import Report

logger = logging.getLogger(__name__)


def format_cell(value: Any) -> str:
    if isinstance(value, (list, tuple)):
        return " ".join(format_cell(v) for v in value)
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


class CsvWriter:
    extension = "csv"

    def write(self, report: Report, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        columns = report.columns()
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\r\n")
            writer.writerow(columns)
            for row in report.rows:
                writer.writerow([format_cell(row.get(col)) for col in columns])
        logger.info(f"✓ wrote {len(report.rows)} rows to {path}")
        return path
