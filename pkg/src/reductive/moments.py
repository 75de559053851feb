"""Sample moment matrices of the inverse regression of X on the basis F.

All covariances use divisor n, not n - 1: the likelihoods built on them are
stated with /n and their ratios are only constant-free under that convention.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg as sla

from reductive.basis import BasisMatrix, assign_slices
from reductive.errors import (
    DataFormatError,
    DegenerateBasisError,
    DimensionMismatchError,
    InsufficientDataError,
)
from reductive.linalg import SymEig, symmetrize, sym_eig

logger = logging.getLogger(__name__)

RANK_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class Dataset:
    """Predictors X (n x p, rows are observations) paired with a response y."""

    X: NDArray[np.float64]
    y: NDArray[np.float64]
    column_names: tuple[str, ...] = field(default_factory=tuple)
    response_name: str = "y"

    def __post_init__(self) -> None:
        X = np.array(self.X, dtype=float)
        y = np.array(self.y, dtype=float).ravel()
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2:
            raise DimensionMismatchError(f"X must be 2-D, got shape {X.shape}")
        if X.shape[0] != y.size:
            raise DimensionMismatchError(
                f"X has {X.shape[0]} rows but the response has {y.size} entries"
            )
        if X.shape[0] < 2:
            raise InsufficientDataError(f"need at least 2 observations, got {X.shape[0]}")
        bad_rows, bad_cols = np.nonzero(~np.isfinite(X))
        if bad_rows.size:
            name = self._name_of(int(bad_cols[0]), X.shape[1])
            raise DataFormatError(
                f"non-finite predictor value in column {name!r}, row {int(bad_rows[0]) + 1}",
                column=name,
                row=int(bad_rows[0]) + 1,
            )
        bad_y = np.nonzero(~np.isfinite(y))[0]
        if bad_y.size:
            raise DataFormatError(
                f"non-finite response value in row {int(bad_y[0]) + 1}",
                column=self.response_name,
                row=int(bad_y[0]) + 1,
            )
        names = tuple(self.column_names) or tuple(f"x{j + 1}" for j in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise DimensionMismatchError(
                f"{len(names)} column names given for {X.shape[1]} predictors"
            )
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "column_names", names)

    def _name_of(self, j: int, p: int) -> str:
        if self.column_names and len(self.column_names) == p:
            return str(self.column_names[j])
        return f"x{j + 1}"

    @property
    def n(self) -> int:
        return int(self.X.shape[0])

    @property
    def p(self) -> int:
        return int(self.X.shape[1])

    @property
    def xbar(self) -> NDArray[np.float64]:
        return self.X.mean(axis=0)

    def centered(self) -> NDArray[np.float64]:
        """The matrix with rows (X_y - Xbar)^T."""
        return self.X - self.xbar

    def require_full_covariance(self) -> None:
        """Full-covariance fits need n >= p + 2."""
        if self.n < self.p + 2:
            raise InsufficientDataError(
                f"full-covariance fits need n >= p + 2 = {self.p + 2}, got n = {self.n}"
            )


@dataclass(frozen=True, eq=False)
class MomentSet:
    """Sigma_hat = Sigma_fit + Sigma_res plus the eigendecompositions on demand."""

    sigma_hat: NDArray[np.float64]
    sigma_fit: NDArray[np.float64]
    sigma_res: NDArray[np.float64]
    xbar: NDArray[np.float64]
    n: int
    r: int
    slice_means: NDArray[np.float64] | None = None
    slice_weights: NDArray[np.float64] | None = None

    @property
    def p(self) -> int:
        return int(self.sigma_hat.shape[0])

    @cached_property
    def eig_sigma(self) -> SymEig:
        return sym_eig(self.sigma_hat)

    @cached_property
    def eig_fit(self) -> SymEig:
        return sym_eig(self.sigma_fit)

    @cached_property
    def eig_res(self) -> SymEig:
        return sym_eig(self.sigma_res)

    @cached_property
    def rank_fit(self) -> int:
        """Numerical rank of Sigma_fit, relative to the scale of Sigma_hat."""
        scale = max(float(self.eig_sigma.eigenvalues[0]), np.finfo(float).tiny)
        return int(np.sum(self.eig_fit.eigenvalues > self.p * RANK_RTOL * scale))


def _orthonormal_basis(F: NDArray[np.float64]) -> NDArray[np.float64]:
    Q, R = sla.qr(F, mode="economic")
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag.max() == 0.0 or diag.min() <= RANK_RTOL * diag.max():
        raise DegenerateBasisError(
            f"F^T F is singular: the {F.shape[1]} basis columns are linearly dependent"
        )
    return Q


def compute_moments(data: Dataset, F: BasisMatrix | ArrayLike) -> MomentSet:
    """Sigma_hat, Sigma_fit and Sigma_res of the regression of centered X on F.

    Sigma_fit = X^T P_F X / n with P_F the projection onto span(F), taken
    through a QR factor of F.
    """
    Fm = np.asarray(F.F if isinstance(F, BasisMatrix) else F, dtype=float)
    if Fm.ndim == 1:
        Fm = Fm.reshape(-1, 1)
    if Fm.shape[0] != data.n:
        raise DimensionMismatchError(f"F has {Fm.shape[0]} rows but the data have n = {data.n}")
    if Fm.shape[1] == 0:
        raise DegenerateBasisError("the basis has no columns")
    Q = _orthonormal_basis(Fm)
    n = data.n
    Xc = data.centered()
    fitted = Q @ (Q.T @ Xc)
    sigma_hat = symmetrize(Xc.T @ Xc / n)
    sigma_fit = symmetrize(fitted.T @ fitted / n)
    sigma_res = symmetrize(sigma_hat - sigma_fit)
    return MomentSet(
        sigma_hat=sigma_hat,
        sigma_fit=sigma_fit,
        sigma_res=sigma_res,
        xbar=data.xbar,
        n=n,
        r=int(Fm.shape[1]),
    )


def marginal_moments(data: Dataset) -> MomentSet:
    """Moments of the saturated fit (one coordinate per observation): Sigma_fit = Sigma_hat."""
    Xc = data.centered()
    sigma_hat = symmetrize(Xc.T @ Xc / data.n)
    return MomentSet(
        sigma_hat=sigma_hat,
        sigma_fit=sigma_hat.copy(),
        sigma_res=np.zeros_like(sigma_hat),
        xbar=data.xbar,
        n=data.n,
        r=data.n - 1,
    )


def _grouped_moments(data: Dataset, labels: NDArray[np.int_]) -> MomentSet:
    groups = np.unique(labels)
    n = data.n
    xbar = data.xbar
    Xc = data.centered()
    counts = np.array([np.sum(labels == g) for g in groups], dtype=float)
    if np.any(counts == 0):
        raise DegenerateBasisError("empty slice")
    means = np.vstack([data.X[labels == g].mean(axis=0) for g in groups])
    weights = counts / n
    deviations = means - xbar
    sigma_hat = symmetrize(Xc.T @ Xc / n)
    sigma_fit = symmetrize((deviations * weights[:, None]).T @ deviations)
    return MomentSet(
        sigma_hat=sigma_hat,
        sigma_fit=sigma_fit,
        sigma_res=symmetrize(sigma_hat - sigma_fit),
        xbar=xbar,
        n=n,
        r=int(groups.size - 1),
        slice_means=means,
        slice_weights=weights,
    )


def slice_mean_form(data: Dataset, h: int) -> MomentSet:
    """Moments with a slice basis, computed from slice means.

    Sigma_fit = sum_k (n_k / n)(Xbar_k - Xbar)(Xbar_k - Xbar)^T, which agrees
    with the projection form of compute_moments for the same slices.
    """
    if h < 2:
        raise DegenerateBasisError(f"need at least 2 slices, got {h}")
    labels = assign_slices(data.y, h)
    return _grouped_moments(data, labels)


def between_class_moments(data: Dataset) -> MomentSet:
    """Moments with one class per distinct response value.

    Sigma_fit is then the between-class covariance used for principal
    components when responses are replicated.
    """
    _, labels = np.unique(data.y, return_inverse=True)
    if np.unique(labels).size < 2:
        raise DegenerateBasisError("the response takes a single value")
    return _grouped_moments(data, labels.ravel())
