"""Likelihood-ratio inference on the dimension of the reductive subspace.

Each d-dimensional extended PFC model is compared with the full multivariate
linear model X_y = mu + beta f_y + error. Both log likelihoods drop the same
constants and use the same divisor-n covariances, so their difference is the
likelihood ratio with nothing left over.
"""

from __future__ import annotations

import logging

import numpy as np
from scipy.special import gammaincc

from reductive.basis import BasisMatrix
from reductive.errors import InsufficientDataError
from reductive.linalg import Subspace, logdet, orthonormal_completion, sym_eig
from reductive.models import BasisKind, DimensionSelection, DimensionTest, ExtendedStrategy
from reductive.moments import Dataset, compute_moments
from reductive.services.estimators import (
    ExtendedPFCObjective,
    FittedReduction,
    fit_extended_pfc,
    resolve_basis,
)
from reductive.services.grassmann import OptimOptions

logger = logging.getLogger(__name__)


def chisq_sf(x: float, df: int) -> float:
    """Upper-tail chi-squared probability P(chi2_df > x)."""
    if df < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {df}")
    if x < 0:
        raise ValueError(f"chi-squared statistic must be >= 0, got {x}")
    return float(gammaincc(df / 2.0, x / 2.0))


def parameter_count(p: int, d: int, r: int) -> int:
    """Free parameters of the d-dimensional extended PFC model.

    beta (d r), the subspace (d (p - d)) and an unstructured covariance
    (p (p + 1) / 2). mu is common to every d and is not counted.
    """
    return d * r + d * (p - d) + p * (p + 1) // 2


def loglik_full(data: Dataset, F: BasisMatrix | BasisKind) -> float:
    """-(n/2) log|Sigma_res|, the maximized log likelihood of the full model."""
    basis = resolve_basis(data, F)
    if data.n <= data.p + basis.r:
        raise InsufficientDataError(
            f"the full model needs n > p + r = {data.p + basis.r}, got n = {data.n}"
        )
    moments = compute_moments(data, basis)
    return -0.5 * data.n * logdet(moments.sigma_res)


def _test_from_fit(fit: FittedReduction, full: float) -> DimensionTest:
    assert fit.r is not None
    lam = 2.0 * (full - fit.loglik)
    df = fit.r * (fit.p - fit.d)
    p_value = chisq_sf(max(lam, 0.0), df) if df >= 1 else 1.0
    npar = parameter_count(fit.p, fit.d, fit.r)
    return DimensionTest(
        d=fit.d,
        lambda_d=lam,
        df=df,
        p_value=p_value,
        loglik=fit.loglik,
        npar=npar,
        aic=-2.0 * fit.loglik + 2.0 * npar,
        bic=-2.0 * fit.loglik + np.log(fit.n) * npar,
    )


def lrt_dimension(
    data: Dataset,
    F: BasisMatrix | BasisKind,
    d: int,
    strategy: ExtendedStrategy | str = ExtendedStrategy.GRASSMANN,
    *,
    seeds: list[Subspace] | None = None,
    options: OptimOptions | None = None,
) -> DimensionTest:
    """Lambda_d = 2 (loglik_full - loglik_d), referred to chi-squared on r (p - d) df."""
    basis = resolve_basis(data, F)
    full = loglik_full(data, basis)
    fit = fit_extended_pfc(data, basis, d, strategy, seeds=seeds, options=options)
    return _test_from_fit(fit, full)


def extension_seed(data: Dataset, basis: BasisMatrix, fit: FittedReduction) -> Subspace:
    """Best (d+1)-dimensional span [G, G0 v] with v an eigenvector of Omega_0^2.

    The d-dimensional maximum is a point of the (d+1)-dimensional model at
    such a span, so ascending from it keeps loglik nondecreasing in d.
    """
    moments = compute_moments(data, basis)
    objective = ExtendedPFCObjective(moments)
    G = fit.subspace.basis
    G0 = orthonormal_completion(fit.subspace).basis
    directions = G0 @ sym_eig(G0.T @ moments.sigma_hat @ G0).eigenvectors
    best: tuple[float, Subspace] | None = None
    for v in directions.T:
        S = Subspace.from_matrix(np.column_stack([G, v]))
        value = objective(S.basis)
        if best is None or value > best[0]:
            best = (value, S)
    assert best is not None
    return best[1]


def select_d(
    data: Dataset,
    F: BasisMatrix | BasisKind,
    alpha: float = 0.05,
    strategy: ExtendedStrategy | str = ExtendedStrategy.GRASSMANN,
    *,
    all_tests: bool = False,
    options: OptimOptions | None = None,
) -> DimensionSelection:
    """Test d = 1, 2, ... and choose the first d whose p-value exceeds alpha.

    If every d < p is rejected, d = p is chosen. With ``all_tests`` the table
    covers every d up to p regardless of where the choice falls.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    strategy = ExtendedStrategy(strategy)
    basis = resolve_basis(data, F)
    full = loglik_full(data, basis)
    tests: list[DimensionTest] = []
    chosen: int | None = None
    seeds: list[Subspace] = []
    for d in range(1, data.p + 1):
        fit = fit_extended_pfc(data, basis, d, strategy, seeds=seeds, options=options)
        test = _test_from_fit(fit, full)
        tests.append(test)
        logger.info(f"d={d}: Lambda={test.lambda_d:.4f} df={test.df} p={test.p_value:.4g}")
        if chosen is None and (test.p_value > alpha or d == data.p):
            chosen = d
            if not all_tests:
                break
        if d < data.p - 1:
            seeds = [extension_seed(data, basis, fit)]
        else:
            seeds = []
    assert chosen is not None
    return DimensionSelection(chosen_d=chosen, alpha=alpha, loglik_full=full, tests=tests)
