"""Likelihood-ratio results on the two public calibration data sets.

The files are not shipped; see data/README.md for where to get them.
"""

import numpy as np
import pytest

from conftest import DATA_DIR
from reductive.infrastructure import read_dataset
from reductive.models import BasisKind
from reductive.moments import Dataset
from reductive.services.estimators import fit_extended_pfc, fit_pc
from reductive.services.selection import lrt_dimension, select_d

MUSSELS = DATA_DIR / "mussels.csv"
WHEAT = DATA_DIR / "wheat.csv"


@pytest.fixture
def mussels():
    if not MUSSELS.exists():
        pytest.skip(f"{MUSSELS} not present")
    raw = read_dataset(MUSSELS, "M", ["H", "L", "S", "W"])
    return Dataset(
        X=np.log(raw.X), y=np.log(raw.y), column_names=raw.column_names, response_name="logM"
    )


@pytest.fixture
def wheat():
    if not WHEAT.exists():
        pytest.skip(f"{WHEAT} not present")
    return read_dataset(WHEAT, "protein", [f"L{j}" for j in range(1, 7)])


def test_mussels_one_direction(mussels):
    test = lrt_dimension(mussels, BasisKind.linear(), 1)
    assert test.df == 3
    assert test.lambda_d == pytest.approx(3.3, abs=0.3)

    fit = fit_extended_pfc(mussels, BasisKind.linear(), 1, "grassmann")
    reduced = fit.reduce(mussels.X)[:, 0]
    first_pc = fit_pc(mussels, 1).reduce(mussels.X)[:, 0]
    assert abs(np.corrcoef(reduced, first_pc)[0, 1]) > 0.99


def test_wheat_two_directions(wheat):
    first = lrt_dimension(wheat, BasisKind.linear(), 1)
    second = lrt_dimension(wheat, BasisKind.linear(), 2)
    assert (first.df, second.df) == (5, 4)
    assert first.lambda_d == pytest.approx(29.1, abs=1.5)
    assert second.lambda_d == pytest.approx(2.6, abs=0.5)
    assert select_d(wheat, BasisKind.linear(), 0.05).chosen_d == 2
