from __future__ import annotations

import logging
from pathlib import Path

from reductive.models import StudyTable

from .base import TableExporter

logger = logging.getLogger(__name__)


class GnuplotScriptExporter(TableExporter):
    """Whitespace .dat file with one column per estimator plus a .gp script that plots it."""

    def __init__(self, value: str = "angle") -> None:
        if value not in ("angle", "mse"):
            raise ValueError(f"value must be 'angle' or 'mse', got {value!r}")
        self.value = value

    @property
    def name(self) -> str:
        return "gnuplot"

    def _cell(self, table: StudyTable, sweep_value: float, estimator: str) -> str:
        row = table.row(sweep_value, estimator)
        if self.value == "mse":
            v = row.mean_mse
        elif table.log_angles:
            v = row.log_mean_angle
        else:
            v = row.mean_angle_deg
        return "NaN" if v is None else repr(float(v))

    def export(self, *, table: StudyTable, out_path: Path) -> list[Path]:
        dat_path = out_path.with_suffix(".dat")
        gp_path = out_path.with_suffix(".gp")
        dat_path.parent.mkdir(parents=True, exist_ok=True)

        lines = [f"# {table.sweep_param} " + " ".join(table.estimators)]
        for x in table.sweep_values():
            cells = [self._cell(table, x, est) for est in table.estimators]
            lines.append(" ".join([repr(float(x)), *cells]))
        dat_path.write_text("\n".join(lines) + "\n")

        if self.value == "mse":
            ylabel = "scaled MSE"
        elif table.log_angles:
            ylabel = "log mean angle (deg)"
        else:
            ylabel = "mean angle (deg)"
        plots = ", ".join(
            f"'{dat_path.name}' using 1:{i + 2} with linespoints title '{est}'"
            for i, est in enumerate(table.estimators)
        )
        script = "\n".join(
            [
                "set terminal pngcairo size 800,600",
                f"set output '{out_path.with_suffix('.png').name}'",
                f"set title '{table.name}'",
                f"set xlabel '{table.sweep_param}'",
                f"set ylabel '{ylabel}'",
                "set key top right",
                f"plot {plots}",
                "",
            ]
        )
        gp_path.write_text(script)
        logger.info(f"Wrote gnuplot data and script for {table.name} to {gp_path.parent}")
        return [dat_path, gp_path]
