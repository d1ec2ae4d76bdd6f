"""
JSON report writer.
Fields: command, config, rows, violations.
"""
import logging
from pathlib import Path

from schemas.report import Report

logger = logging.getLogger(__name__)


class JsonWriter:
    extension = "json"

    def write(self, report: Report, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
        logger.info(f"✓ wrote {len(report.rows)} rows to {path}")
        return path
