# services/kantorovich/schemas/report.py
from __future__ import annotations

from typing import Any, Dict, List

from pydantic import BaseModel, Field


class Report(BaseModel):
    """What every subcommand emits; serialized by the report adapters."""
    command: str
    config: Dict[str, Any] = Field(default_factory=dict)
    rows: List[Dict[str, Any]] = Field(default_factory=list)
    violations: List[str] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def columns(self) -> List[str]:
        """Union of row keys in first-seen order (stable CSV header)."""
        seen: Dict[str, None] = {}
        for row in self.rows:
            for key in row:
                seen.setdefault(key, None)
        return list(seen)
