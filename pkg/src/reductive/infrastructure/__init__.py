"""I/O boundary adapters (dataset files, study-table exporters)."""

from .datasets import read_dataset, read_matrix, write_dataset, write_matrix
from .export import CsvTableExporter, GnuplotScriptExporter, TableExporter

__all__ = [
    "CsvTableExporter",
    "GnuplotScriptExporter",
    "TableExporter",
    "read_dataset",
    "read_matrix",
    "write_dataset",
    "write_matrix",
]
