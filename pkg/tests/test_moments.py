import numpy as np
import pytest
from numpy.testing import assert_allclose

from reductive.basis import build_basis
from reductive.errors import (
    DataFormatError,
    DegenerateBasisError,
    DimensionMismatchError,
    InsufficientDataError,
)
from reductive.models import BasisKind
from reductive.moments import (
    Dataset,
    between_class_moments,
    compute_moments,
    marginal_moments,
    slice_mean_form,
)


@pytest.mark.parametrize("kind", ["linear", "poly:3", "slices:5", "fourier:2"])
def test_decomposition_holds(m7_data, kind):
    moments = compute_moments(m7_data, build_basis(m7_data.y, BasisKind.parse(kind)))
    assert_allclose(moments.sigma_fit + moments.sigma_res, moments.sigma_hat, atol=1e-12)
    Xc = m7_data.centered()
    assert_allclose(moments.sigma_hat, Xc.T @ Xc / m7_data.n, atol=1e-12)
    assert moments.eig_res.eigenvalues[-1] > -1e-10


def test_slice_mean_form_matches_projection(m7_data):
    projection = compute_moments(m7_data, build_basis(m7_data.y, BasisKind.slices(6)))
    means = slice_mean_form(m7_data, 6)
    assert_allclose(means.sigma_fit, projection.sigma_fit, atol=1e-12)
    assert means.r == 5
    assert means.slice_weights.sum() == pytest.approx(1.0)


def test_rank_fit_is_bounded_by_r(m7_data):
    moments = compute_moments(m7_data, build_basis(m7_data.y, BasisKind.polynomial(2)))
    assert moments.rank_fit == 2


def test_singular_basis_rejected(m7_data):
    F = np.column_stack([m7_data.y, 2.0 * m7_data.y])
    with pytest.raises(DegenerateBasisError):
        compute_moments(m7_data, F)
    with pytest.raises(DimensionMismatchError):
        compute_moments(m7_data, np.ones((3, 1)))


def test_marginal_moments(m7_data):
    moments = marginal_moments(m7_data)
    assert_allclose(moments.sigma_fit, moments.sigma_hat)
    assert_allclose(moments.sigma_res, 0.0)


def test_between_class_uses_distinct_responses(rng):
    y = np.repeat([0.0, 1.0, 2.0], 10)
    X = rng.standard_normal((30, 4)) + np.outer(y, [1.0, 0.0, 0.0, 0.0])
    moments = between_class_moments(Dataset(X=X, y=y))
    assert moments.r == 2
    assert moments.rank_fit == 2
    assert_allclose(moments.sigma_fit + moments.sigma_res, moments.sigma_hat, atol=1e-12)


def test_dataset_names_bad_cells():
    X = np.ones((3, 2))
    X[1, 1] = np.nan
    with pytest.raises(DataFormatError) as info:
        Dataset(X=X, y=np.arange(3.0), column_names=("a", "b"))
    assert info.value.column == "b"
    assert info.value.row == 2


def test_dataset_shape_checks():
    with pytest.raises(DimensionMismatchError):
        Dataset(X=np.ones((3, 2)), y=np.ones(4))
    with pytest.raises(InsufficientDataError):
        Dataset(X=np.ones((1, 2)), y=np.ones(1))
    data = Dataset(X=np.ones((3, 2)), y=np.arange(3.0))
    assert data.column_names == ("x1", "x2")
    with pytest.raises(ValueError):
        data.X[0, 0] = 2.0
