"""Forward prediction of the response from a fitted reduction.

The forward model regresses y on the reduced predictors W^T X by OLS. For an
OLS fit the reduction already is the linear predictor, so its slope is fixed
at 1 and only the intercept is estimated.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg as sla

from reductive.errors import DimensionMismatchError, FitError
from reductive.models import Method
from reductive.moments import Dataset
from reductive.services.estimators import FittedReduction, reduce

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ForwardFit:
    """y_hat = intercept + slope^T (W^T x)."""

    intercept: float
    slope: NDArray[np.float64]


def forward_fit(fit: FittedReduction, train: Dataset) -> ForwardFit:
    if train.p != fit.p:
        raise DimensionMismatchError(f"training data have p = {train.p}, the fit has p = {fit.p}")
    Z = reduce(fit, train.X)
    if fit.method is Method.OLS:
        return ForwardFit(intercept=float(np.mean(train.y - Z[:, 0])), slope=np.ones(1))
    design = np.column_stack([np.ones(train.n), Z])
    coef, _, rank, _ = sla.lstsq(design, train.y)
    if rank < design.shape[1]:
        raise FitError(
            f"degenerate reduced regressor: rank {rank} < {design.shape[1]} in the forward fit"
        )
    return ForwardFit(intercept=float(coef[0]), slope=np.asarray(coef[1:], dtype=float))


def predict(fit: FittedReduction, train: Dataset, Xnew: ArrayLike) -> NDArray[np.float64]:
    """Forward-OLS predictions at the rows of Xnew."""
    forward = forward_fit(fit, train)
    return forward.intercept + reduce(fit, Xnew) @ forward.slope


def scaled_mse(
    fit: FittedReduction,
    forward: ForwardFit,
    sigma: ArrayLike,
    cov_xy: ArrayLike,
    sigma2_y: float,
    mu_x: ArrayLike | None = None,
    mu_y: float = 0.0,
) -> float:
    """E(Y_f - a - b^T W^T X_f)^2 / sigma^2_{Y|X} over a future (Y_f, X_f).

    The expectation is exact for jointly distributed (Y, X) with means
    (mu_y, mu_x), Var(X) = sigma, Cov(X, Y) = cov_xy and Var(Y) = sigma2_y:
    the mean error is mu_y - a - b^T W^T mu_x and the error variance is
    sigma2_y - 2 b^T W^T C + b^T W^T Sigma W b. The denominator is
    sigma2_y - C^T Sigma^{-1} C, so the ratio is at least 1.
    """
    S = np.asarray(sigma, dtype=float)
    C = np.asarray(cov_xy, dtype=float).ravel()
    mx = np.zeros(fit.p) if mu_x is None else np.asarray(mu_x, dtype=float).ravel()
    v = fit.coordinate_map @ forward.slope
    bias = mu_y - forward.intercept - float(v @ mx)
    variance = sigma2_y - 2.0 * float(v @ C) + float(v @ S @ v)
    conditional = sigma2_y - float(C @ np.linalg.solve(S, C))
    if conditional <= 0.0:
        raise FitError(f"Var(Y|X) = {conditional:.3e} is not positive")
    return (bias**2 + variance) / conditional
