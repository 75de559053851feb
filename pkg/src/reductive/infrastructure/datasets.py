"""CSV ingestion and output for datasets and matrices.

Files need a header row. Floats are read with pandas' round-trip parser and
written with the shortest repr that round-trips, so a matrix written here
re-reads to identical values.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from pathlib import Path

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike

from reductive.errors import DataFormatError
from reductive.moments import Dataset

logger = logging.getLogger(__name__)


def _read_frame(path: Path) -> pd.DataFrame:
    if not path.exists():
        raise DataFormatError(f"data file not found: {path}")
    try:
        frame = pd.read_csv(path, float_precision="round_trip", skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise DataFormatError(f"{path} is empty; a header row is required") from None
    except pd.errors.ParserError as exc:
        raise DataFormatError(f"cannot parse {path}: {exc}") from None
    if frame.empty:
        raise DataFormatError(f"{path} has a header but no data rows")
    frame.columns = [str(c).strip() for c in frame.columns]
    return frame


def _numeric_column(frame: pd.DataFrame, name: str) -> np.ndarray:
    raw = frame[name]
    values = pd.to_numeric(raw, errors="coerce")
    bad = values.isna() | ~np.isfinite(values.to_numpy(dtype=float, na_value=np.nan))
    if bad.any():
        row = int(np.argmax(bad.to_numpy()))
        raise DataFormatError(
            f"column {name!r}, row {row + 1}: {raw.iloc[row]!r} is not a finite number",
            column=name,
            row=row + 1,
        )
    return values.to_numpy(dtype=float)


def read_dataset(
    path: str | Path,
    response: str,
    predictors: Sequence[str] | None = None,
    *,
    binary: bool = False,
) -> Dataset:
    """Read a CSV file into a Dataset with ``response`` as y.

    Predictors default to every other column. With ``binary`` each predictor
    must be 0 or 1. Errors name the offending column and 1-based data row.
    """
    path = Path(path)
    frame = _read_frame(path)
    if response not in frame.columns:
        raise DataFormatError(
            f"response column {response!r} not in {path.name}; columns are {list(frame.columns)}",
            column=response,
        )
    names = list(predictors) if predictors else [c for c in frame.columns if c != response]
    missing = [c for c in names if c not in frame.columns]
    if missing:
        raise DataFormatError(f"predictor columns {missing} not in {path.name}", column=missing[0])
    if not names:
        raise DataFormatError(f"{path.name} has no predictor columns besides {response!r}")

    y = _numeric_column(frame, response)
    X = np.column_stack([_numeric_column(frame, c) for c in names])
    if binary:
        for j, name in enumerate(names):
            bad = np.nonzero((X[:, j] != 0.0) & (X[:, j] != 1.0))[0]
            if bad.size:
                row = int(bad[0])
                raise DataFormatError(
                    f"column {name!r}, row {row + 1}: {X[row, j]!r} is not binary (0/1)",
                    column=name,
                    row=row + 1,
                )
    logger.info(f"Read {path.name}: n={X.shape[0]}, p={X.shape[1]}, response={response!r}")
    return Dataset(X=X, y=y, column_names=tuple(names), response_name=response)


def write_matrix(path: str | Path, matrix: ArrayLike, columns: Sequence[str]) -> Path:
    """Write a 2-D array with a header row."""
    path = Path(path)
    M = np.atleast_2d(np.asarray(matrix, dtype=float))
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(M, columns=list(columns)).to_csv(path, index=False)
    return path


def read_matrix(path: str | Path) -> np.ndarray:
    """Read a headered all-numeric CSV back into a 2-D array."""
    frame = _read_frame(Path(path))
    return np.column_stack([_numeric_column(frame, c) for c in frame.columns])


def write_dataset(path: str | Path, data: Dataset) -> Path:
    """Write predictors then the response, under their names."""
    columns = [*data.column_names, data.response_name]
    return write_matrix(path, np.column_stack([data.X, data.y]), columns)


def inverse_response_frame(data: Dataset) -> pd.DataFrame:
    """Long table of (predictor, y, x) pairs for inverse response plots."""
    frames = [
        pd.DataFrame({"predictor": name, data.response_name: data.y, "x": data.X[:, j]})
        for j, name in enumerate(data.column_names)
    ]
    return pd.concat(frames, ignore_index=True)
