"""
Report writer interface.
Defines the contract every output format implements.
"""
from pathlib import Path
from typing import Protocol

from core.errors import ConfigError
from schemas.report import Report


class ReportWriter(Protocol):
    """
    Protocol for report writers.

    Lets commands emit csv, json or xlsx without knowing the format.
    """

    extension: str

    def write(self, report: Report, path: Path) -> Path:
        """
        Serialize `report` to `path`.

        Returns:
            The path written.
        """
        ...


def get_writer(fmt: str) -> ReportWriter:
    """
    Raises:
        ConfigError: unknown format name
    """
    fmt = (fmt or "").lower()
    if fmt == "csv":
        from adapters.csv import CsvWriter
        return CsvWriter()
    if fmt == "json":
        from adapters.json import JsonWriter
        return JsonWriter()
    if fmt == "xlsx":
        from adapters.xlsx import XlsxWriter
        return XlsxWriter()
    raise ConfigError(f"Unknown report format: {fmt!r} (expected csv, json or xlsx)")
