"""Study-table exporters (CSV, gnuplot)."""

# Re-export for easier access, e.g. `from reductive.infrastructure.export import CsvTableExporter`
from .base import TableExporter, replicate_frame, summary_frame
from .csv_exporter import CsvTableExporter
from .gnuplot_exporter import GnuplotScriptExporter

__all__ = [
    "CsvTableExporter",
    "GnuplotScriptExporter",
    "TableExporter",
    "replicate_frame",
    "summary_frame",
]
