from __future__ import annotations

from abc import ABC, abstractmethod
from pathlib import Path

import pandas as pd

from reductive.models import StudyTable

SUMMARY_COLUMNS = [
    "sweep_param",
    "sweep_value",
    "estimator",
    "mean_angle_deg",
    "sd_angle_deg",
    "log_mean_angle",
    "mean_mse",
    "n_ok",
    "n_fail",
]


def summary_frame(table: StudyTable) -> pd.DataFrame:
    """One row per (sweep value, estimator); candidate-source tallies as n_<source> columns."""
    sources = sorted({s for row in table.rows for s in row.source_counts})
    records = []
    for row in table.rows:
        record = {col: getattr(row, col) for col in SUMMARY_COLUMNS}
        for source in sources:
            record[f"n_{source}"] = row.source_counts.get(source, 0)
        records.append(record)
    return pd.DataFrame.from_records(
        records, columns=SUMMARY_COLUMNS + [f"n_{s}" for s in sources]
    )


def replicate_frame(table: StudyTable) -> pd.DataFrame:
    """Per-replication angles (and MSEs when computed) in long form."""
    records = []
    for row in table.rows:
        for rep, angle in enumerate(row.angles):
            records.append(
                {
                    "sweep_value": row.sweep_value,
                    "estimator": row.estimator,
                    "rep": rep,
                    "angle_deg": angle,
                    "scaled_mse": row.mses[rep] if rep < len(row.mses) else None,
                }
            )
    return pd.DataFrame.from_records(
        records, columns=["sweep_value", "estimator", "rep", "angle_deg", "scaled_mse"]
    )


class TableExporter(ABC):
    """Abstract base class for study-table writers."""

    @property
    @abstractmethod
    def name(self) -> str:
        """Return the short name of this exporter (e.g. 'csv')."""

    @abstractmethod
    def export(self, *, table: StudyTable, out_path: Path) -> list[Path]:
        """Write *table* at *out_path* (plus any sidecar files) and return every path written."""
