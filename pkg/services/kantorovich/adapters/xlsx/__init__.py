"""
XLSX report writer (openpyxl): sheet "rows" with a bold header and sheet
"violations" with one message per line.
"""
import logging
import math
from pathlib import Path

from openpyxl import Workbook
from openpyxl.styles import Font

from schemas.report import Report

logger = logging.getLogger(__name__)


def _cell(value):
    # Excel has no inf/nan
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    if isinstance(value, (dict, list, tuple)):
        return str(value)
    return value


class XlsxWriter:
    extension = "xlsx"

    def write(self, report: Report, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        wb = Workbook()
        ws = wb.active
        ws.title = "rows"
        columns = report.columns()
        ws.append(columns)
        for cell in ws[1]:
            cell.font = Font(bold=True)
        for row in report.rows:
            ws.append([_cell(row.get(col)) for col in columns])

        vs = wb.create_sheet("violations")
        vs.append(["violation"])
        vs["A1"].font = Font(bold=True)
        for message in report.violations:
            vs.append([message])

        wb.save(path)
        logger.info(f"✓ wrote {len(report.rows)} rows to {path}")
        return path
