import numpy as np
import pytest

from conftest import make_dataset
from reductive.errors import InsufficientDataError
from reductive.models import BasisKind, ExtendedStrategy
from reductive.moments import Dataset
from reductive.services.selection import (
    chisq_sf,
    loglik_full,
    lrt_dimension,
    parameter_count,
    select_d,
)


def two_direction_data(rng, n=300, p=5):
    y = rng.standard_normal(n)
    X = rng.standard_normal((n, p))
    X[:, 0] += 3.0 * y
    X[:, 1] += 3.0 * (y**2 - 1.0)
    return Dataset(X=X, y=y)


def test_chisq_tail():
    assert chisq_sf(3.841458820694124, 1) == pytest.approx(0.05, rel=1e-9)
    assert chisq_sf(0.0, 4) == 1.0
    assert chisq_sf(18.307038053275146, 10) == pytest.approx(0.05, rel=1e-9)
    with pytest.raises(ValueError):
        chisq_sf(1.0, 0)
    with pytest.raises(ValueError):
        chisq_sf(-1.0, 2)


def test_parameter_count():
    # beta, the subspace and an unstructured covariance
    p, d, r = 6, 2, 3
    blocks = d * r + d * (p - d) + p * (p + 1) // 2
    assert parameter_count(p, d, r) == blocks
    assert blocks == 35
    assert parameter_count(4, 4, 2) == 8 + 10


def test_full_dimension_statistic_is_zero(rng):
    data = make_dataset(rng, n=120, p=4)
    test = lrt_dimension(data, BasisKind.polynomial(2), 4)
    assert test.lambda_d == pytest.approx(0.0, abs=1e-8)
    assert test.df == 0
    assert test.p_value == 1.0


def test_statistic_is_nonnegative_with_chi2_df(rng):
    data = make_dataset(rng, n=150, p=5)
    test = lrt_dimension(data, BasisKind.polynomial(3), 2, ExtendedStrategy.PFC_ALL)
    assert test.lambda_d >= -1e-8
    assert test.df == 3 * (5 - 2)
    assert 0.0 <= test.p_value <= 1.0
    assert test.npar == 6 + 6 + 15
    assert test.aic == pytest.approx(-2.0 * test.loglik + 2.0 * test.npar)
    assert test.bic == pytest.approx(-2.0 * test.loglik + np.log(150) * test.npar)


def test_lambda_nonincreasing_in_d(rng):
    data = two_direction_data(rng)
    selection = select_d(data, BasisKind.polynomial(2), all_tests=True)
    lambdas = [t.lambda_d for t in selection.tests]
    assert [t.d for t in selection.tests] == [1, 2, 3, 4, 5]
    assert np.all(np.diff(lambdas) <= 1e-6)
    assert lambdas[-1] == pytest.approx(0.0, abs=1e-8)


def test_two_directions_are_detected(rng):
    selection = select_d(two_direction_data(rng), BasisKind.polynomial(2))
    assert selection.chosen_d >= 2
    assert selection.tests[0].p_value < 0.05
    assert selection.tests[-1].d == selection.chosen_d


def test_alpha_one_selects_full_model(rng):
    data = make_dataset(rng, n=100, p=3)
    selection = select_d(data, BasisKind.linear(), alpha=1.0)
    assert selection.chosen_d == 3
    assert len(selection.tests) == 3


def test_alpha_out_of_range(rng):
    data = make_dataset(rng, n=100, p=3)
    with pytest.raises(ValueError):
        select_d(data, BasisKind.linear(), alpha=0.0)


def test_full_model_needs_rows(rng):
    data = make_dataset(rng, n=7, p=5)
    with pytest.raises(InsufficientDataError):
        loglik_full(data, BasisKind.polynomial(2))


@pytest.mark.slow
def test_pure_noise_rejection_rate_is_calibrated():
    rejections = 0
    reps = 1000
    for seed in range(reps):
        rng = np.random.default_rng(seed)
        data = Dataset(X=rng.standard_normal((200, 4)), y=rng.standard_normal(200))
        test = lrt_dimension(data, BasisKind.linear(), 1)
        rejections += test.p_value < 0.05
    assert 0.02 <= rejections / reps <= 0.09


@pytest.mark.slow
def test_null_rejection_rate_is_calibrated():
    rejections = 0
    reps = 1000
    for seed in range(reps):
        data = make_dataset(np.random.default_rng(seed), n=200, p=4)
        test = lrt_dimension(data, BasisKind.linear(), 1)
        rejections += test.p_value < 0.05
    assert 0.02 <= rejections / reps <= 0.09
