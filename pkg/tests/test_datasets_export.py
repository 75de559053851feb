import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_array_equal

from reductive.errors import DataFormatError
from reductive.infrastructure import read_dataset
from reductive.infrastructure.datasets import (
    inverse_response_frame,
    read_matrix,
    write_dataset,
    write_matrix,
)
from reductive.infrastructure.export import (
    CsvTableExporter,
    GnuplotScriptExporter,
    replicate_frame,
    summary_frame,
)
from reductive.models import StudyRow, StudyTable


@pytest.fixture
def table():
    rows = [
        StudyRow(sweep_param="sigma_0", sweep_value=v, estimator=e, mean_angle_deg=a,
                 log_mean_angle=float(np.log(a)), n_ok=2, angles=[a - 1.0, a + 1.0],
                 source_counts={"PC": 2} if e == "pfc_all" else {})
        for v, e, a in [(0.5, "ols", 10.0), (0.5, "pfc_all", 5.0),
                        (1.0, "ols", 12.0), (1.0, "pfc_all", 20.0)]
    ]
    return StudyTable(name="demo", model="m12", sweep_param="sigma_0",
                      estimators=["ols", "pfc_all"], reps=2, seed=0, rows=rows)


def test_matrix_round_trip_is_exact(tmp_path, rng):
    M = rng.standard_normal((25, 4)) * 10.0 ** rng.integers(-8, 8, (25, 4))
    path = write_matrix(tmp_path / "m.csv", M, ["a", "b", "c", "d"])
    assert_array_equal(read_matrix(path), M)


def test_dataset_round_trip(tmp_path, toy_csv):
    data = read_dataset(toy_csv, "y")
    assert data.column_names == ("a", "b")
    assert data.response_name == "y"
    again = read_dataset(write_dataset(tmp_path / "copy.csv", data), "y")
    assert_array_equal(again.X, data.X)
    assert_array_equal(again.y, data.y)


def test_predictor_subset(toy_csv):
    data = read_dataset(toy_csv, "y", ["b"])
    assert data.p == 1
    assert data.column_names == ("b",)


def test_bad_cell_names_column_and_row(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x1,x2,y\n1,2,3\n4,oops,6\n7,8,9\n")
    with pytest.raises(DataFormatError) as info:
        read_dataset(path, "y")
    assert (info.value.column, info.value.row) == ("x2", 2)
    assert "'x2'" in str(info.value) and "row 2" in str(info.value)


def test_missing_cell_is_reported(tmp_path):
    path = tmp_path / "gap.csv"
    path.write_text("x1,y\n1,2\n,3\n")
    with pytest.raises(DataFormatError) as info:
        read_dataset(path, "y")
    assert info.value.row == 2


@pytest.mark.parametrize(
    "content, response, message",
    [
        ("", "y", "empty"),
        ("x1,y\n", "y", "no data rows"),
        ("x1,x2\n1,2\n", "y", "response column"),
        ("y\n1\n2\n", "y", "no predictor"),
    ],
)
def test_malformed_files(tmp_path, content, response, message):
    path = tmp_path / "f.csv"
    path.write_text(content)
    with pytest.raises(DataFormatError, match=message):
        read_dataset(path, response)


def test_missing_file(tmp_path):
    with pytest.raises(DataFormatError, match="not found"):
        read_dataset(tmp_path / "nope.csv", "y")


def test_binary_flag(tmp_path):
    path = tmp_path / "b.csv"
    path.write_text("b1,b2,y\n0,1,0.5\n1,2,1.5\n")
    with pytest.raises(DataFormatError) as info:
        read_dataset(path, "y", binary=True)
    assert (info.value.column, info.value.row) == ("b2", 2)


def test_inverse_response_frame(toy_csv):
    data = read_dataset(toy_csv, "y")
    frame = inverse_response_frame(data)
    assert list(frame.columns) == ["predictor", "y", "x"]
    assert len(frame) == 2 * data.n
    assert_array_equal(frame.loc[frame.predictor == "b", "x"], data.X[:, 1])


def test_summary_and_replicate_frames(table):
    summary = summary_frame(table)
    assert list(summary.columns[:3]) == ["sweep_param", "sweep_value", "estimator"]
    assert summary["n_PC"].tolist() == [0, 2, 0, 2]
    reps = replicate_frame(table)
    assert len(reps) == 8
    assert reps.scaled_mse.isna().all()


def test_csv_exporter(tmp_path, table):
    written = CsvTableExporter().export(table=table, out_path=tmp_path / "t" / "demo.csv")
    assert [p.name for p in written] == ["demo.csv", "demo_replicates.csv"]
    frame = pd.read_csv(written[0])
    assert frame.loc[3, "mean_angle_deg"] == 20.0
    only = CsvTableExporter(include_replicates=False).export(table=table, out_path=tmp_path / "x.csv")
    assert len(only) == 1


def test_gnuplot_exporter(tmp_path, table):
    dat, gp = GnuplotScriptExporter().export(table=table, out_path=tmp_path / "demo.csv")
    lines = dat.read_text().splitlines()
    assert lines[0] == "# sigma_0 ols pfc_all"
    assert lines[1].split() == ["0.5", "10.0", "5.0"]
    script = gp.read_text()
    assert "using 1:3" in script and "title 'pfc_all'" in script
    mse_dat, _ = GnuplotScriptExporter("mse").export(table=table, out_path=tmp_path / "mse.csv")
    assert "NaN" in mse_dat.read_text()
    with pytest.raises(ValueError):
        GnuplotScriptExporter("median")
