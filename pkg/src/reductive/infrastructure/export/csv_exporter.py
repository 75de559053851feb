from __future__ import annotations

import logging
from pathlib import Path

from reductive.models import StudyTable

from .base import TableExporter, replicate_frame, summary_frame

logger = logging.getLogger(__name__)


class CsvTableExporter(TableExporter):
    """Summary CSV at out_path, per-replication angles beside it as <stem>_replicates.csv."""

    def __init__(self, include_replicates: bool = True) -> None:
        self.include_replicates = include_replicates

    @property
    def name(self) -> str:
        return "csv"

    def export(self, *, table: StudyTable, out_path: Path) -> list[Path]:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        summary_frame(table).to_csv(out_path, index=False)
        written = [out_path]
        if self.include_replicates:
            rep_path = out_path.with_name(f"{out_path.stem}_replicates.csv")
            replicate_frame(table).to_csv(rep_path, index=False)
            written.append(rep_path)
        logger.info(f"Wrote study table {table.name} to {out_path}")
        return written
