"""Generalized principal components for conditionally independent binary predictors.

Each predictor X_j given Y = y follows a one-parameter exponential family with
natural parameter eta_yj = mu_j + gamma_j^T nu_y, so Gamma^T X is a sufficient
reduction. The fit alternates between per-observation logistic regressions
for nu_y and a pooled update of (mu, Gamma).
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, Field
from scipy import linalg as sla
from scipy.special import expit

from reductive.basis import BasisMatrix
from reductive.errors import DataFormatError, DimensionMismatchError
from reductive.linalg import Subspace, sym_eig
from reductive.models import Method
from reductive.services.estimators import FittedReduction

logger = logging.getLogger(__name__)


class ExponentialFamily(ABC):
    """A one-parameter exponential family in natural form: x eta - b(eta)."""

    @property
    @abstractmethod
    def name(self) -> str:
        """Short name of the family (e.g. 'bernoulli')."""

    @abstractmethod
    def validate(self, X: NDArray[np.float64]) -> None:
        """Raise DataFormatError if X is outside the support of the family."""

    @abstractmethod
    def log_partition(self, eta: NDArray[np.float64]) -> NDArray[np.float64]:
        """b(eta)."""

    @abstractmethod
    def mean(self, eta: NDArray[np.float64]) -> NDArray[np.float64]:
        """b'(eta), the mean of the sufficient statistic."""

    @abstractmethod
    def variance(self, eta: NDArray[np.float64]) -> NDArray[np.float64]:
        """b''(eta)."""

    def loglik(self, X: NDArray[np.float64], eta: NDArray[np.float64]) -> float:
        return float(np.sum(X * eta - self.log_partition(eta)))

    def row_loglik(self, X: NDArray[np.float64], eta: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.sum(X * eta - self.log_partition(eta), axis=1)


class Bernoulli(ExponentialFamily):
    """Binary predictors: b(eta) = log(1 + e^eta), mean = logistic(eta)."""

    @property
    def name(self) -> str:
        return "bernoulli"

    def validate(self, X: NDArray[np.float64]) -> None:
        bad_rows, bad_cols = np.nonzero((X != 0.0) & (X != 1.0))
        if bad_rows.size:
            row, col = int(bad_rows[0]), int(bad_cols[0])
            raise DataFormatError(
                f"predictor column {col + 1}, row {row + 1} is {X[row, col]!r}; expected 0 or 1",
                column=str(col + 1),
                row=row + 1,
            )

    def log_partition(self, eta: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.logaddexp(0.0, eta)

    def mean(self, eta: NDArray[np.float64]) -> NDArray[np.float64]:
        return expit(eta)

    def variance(self, eta: NDArray[np.float64]) -> NDArray[np.float64]:
        m = expit(eta)
        return m * (1.0 - m)


@dataclass(eq=False)
class BernoulliPCModel:
    """Offsets mu (p), orthonormal Gamma (p x d) and centered coordinates nu (n x d)."""

    mu: NDArray[np.float64]
    Gamma: NDArray[np.float64]
    nu: NDArray[np.float64]
    history: list[float] = field(default_factory=list)

    @property
    def d(self) -> int:
        return int(self.Gamma.shape[1])

    def eta(self) -> NDArray[np.float64]:
        """Natural parameters eta_yj = mu_j + gamma_j^T nu_y, one row per observation."""
        return self.mu[None, :] + self.nu @ self.Gamma.T

    def probabilities(self) -> NDArray[np.float64]:
        return expit(self.eta())


class BernoulliOptions(BaseModel):
    max_outer: int = Field(200, gt=0, description="Maximum outer alternations")
    tol: float = Field(1e-8, gt=0, description="Relative change of the objective that ends the fit")
    ridge: float = Field(1e-6, ge=0, description="Ridge on nu against complete separation")
    eta_cap: float = Field(30.0, gt=0, description="Cap on |eta| in the likelihood")
    newton_steps: int = Field(3, gt=0, description="Newton steps for nu per outer iteration")
    gamma_steps: int = Field(3, gt=0, description="Grassmann steps for Gamma per outer iteration")
    max_halvings: int = Field(40, gt=0)


def _as_binary(X: ArrayLike, family: ExponentialFamily) -> NDArray[np.float64]:
    M = np.asarray(X, dtype=float)
    if M.ndim != 2:
        raise DimensionMismatchError(f"X must be 2-D, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DataFormatError("X contains non-finite values")
    family.validate(M)
    return M


def bernoulli_loglik(X: ArrayLike, model: BernoulliPCModel) -> float:
    """sum over cells of x eta - log(1 + e^eta)."""
    family = Bernoulli()
    M = _as_binary(X, family)
    eta = model.eta()
    if eta.shape != M.shape:
        raise DimensionMismatchError(f"model implies shape {eta.shape}, X has {M.shape}")
    return family.loglik(M, eta)


class _BernoulliFitter:
    """Alternating ascent on loglik - (ridge / 2) ||nu||^2 with capped eta."""

    def __init__(
        self,
        X: NDArray[np.float64],
        d: int,
        opts: BernoulliOptions,
        family: ExponentialFamily,
        basis: NDArray[np.float64] | None,
    ) -> None:
        self.X = X
        self.n, self.p = X.shape
        self.d = d
        self.opts = opts
        self.family = family
        self.F = basis
        self.gamma_step = 1.0

    # -- objective -----------------------------------------------------------

    def _eta(self, mu, Gamma, nu) -> NDArray[np.float64]:
        cap = self.opts.eta_cap
        return np.clip(mu[None, :] + nu @ Gamma.T, -cap, cap)

    def objective(self, mu, Gamma, nu) -> float:
        penalty = 0.5 * self.opts.ridge * float(np.sum(nu**2))
        return self.family.loglik(self.X, self._eta(mu, Gamma, nu)) - penalty

    # -- starting values -----------------------------------------------------

    def start(self) -> tuple[NDArray, NDArray, NDArray]:
        means = np.clip(self.X.mean(axis=0), 0.01, 0.99)
        mu = np.log(means / (1.0 - means))
        Xc = self.X - self.X.mean(axis=0)
        Gamma = sym_eig(Xc.T @ Xc).top(self.d).copy()
        nu = 4.0 * Xc @ Gamma
        if self.F is not None:
            coef, *_ = sla.lstsq(self.F, nu)
            nu = self.F @ coef
        return mu, Gamma, nu - nu.mean(axis=0)

    # -- step (a): coordinates nu --------------------------------------------

    def update_nu(self, mu, Gamma, nu):
        if self.F is not None:
            return self._update_beta(mu, Gamma, nu)
        ridge = self.opts.ridge
        for _ in range(self.opts.newton_steps):
            eta = self._eta(mu, Gamma, nu)
            grad = (self.X - self.family.mean(eta)) @ Gamma - ridge * nu
            V = self.family.variance(eta)
            H = np.einsum("yj,ja,jb->yab", V, Gamma, Gamma) + ridge * np.eye(self.d)
            step = np.linalg.solve(H, grad[:, :, None])[:, :, 0]
            current = self._row_objective(mu, Gamma, nu)
            scale = np.ones(self.n)
            pending = np.ones(self.n, dtype=bool)
            new_nu = nu.copy()
            for _ in range(self.opts.max_halvings):
                trial = nu + scale[:, None] * step
                better = self._row_objective(mu, Gamma, trial) >= current
                accept = pending & better
                new_nu[accept] = trial[accept]
                pending &= ~better
                if not pending.any():
                    break
                scale[pending] /= 2.0
            nu = new_nu
        shift = nu.mean(axis=0)
        # absorb the mean of nu into the offsets, leaving eta unchanged
        return mu + Gamma @ shift, nu - shift

    def _row_objective(self, mu, Gamma, nu) -> NDArray[np.float64]:
        eta = self._eta(mu, Gamma, nu)
        return self.family.row_loglik(self.X, eta) - 0.5 * self.opts.ridge * np.sum(nu**2, axis=1)

    def _update_beta(self, mu, Gamma, nu):
        F = self.F
        assert F is not None
        r = F.shape[1]
        ridge = self.opts.ridge
        beta, *_ = sla.lstsq(F, nu)  # r x d, nu = F beta
        for _ in range(self.opts.newton_steps):
            nu = F @ beta
            eta = self._eta(mu, Gamma, nu)
            resid = self.X - self.family.mean(eta)
            grad = F.T @ resid @ Gamma - ridge * (F.T @ F) @ beta
            V = self.family.variance(eta)
            H = np.einsum("yk,yl,yj,ja,jb->kalb", F, F, V, Gamma, Gamma).reshape(r * self.d, -1)
            H += ridge * np.kron(F.T @ F, np.eye(self.d))
            step = np.linalg.solve(H, grad.reshape(-1)).reshape(r, self.d)
            base = self.objective(mu, Gamma, nu)
            t = 1.0
            for _ in range(self.opts.max_halvings):
                trial = beta + t * step
                if self.objective(mu, Gamma, F @ trial) >= base:
                    beta = trial
                    break
                t /= 2.0
        return mu, F @ beta

    # -- step (b): offsets mu and subspace Gamma -----------------------------

    def update_mu(self, mu, Gamma, nu):
        for _ in range(self.opts.newton_steps):
            eta = self._eta(mu, Gamma, nu)
            grad = np.sum(self.X - self.family.mean(eta), axis=0)
            hess = np.sum(self.family.variance(eta), axis=0) + 1e-12
            step = grad / hess
            current = self._col_objective(mu, Gamma, nu)
            scale = np.ones(self.p)
            pending = np.ones(self.p, dtype=bool)
            new_mu = mu.copy()
            for _ in range(self.opts.max_halvings):
                trial = mu + scale * step
                better = self._col_objective(trial, Gamma, nu) >= current
                accept = pending & better
                new_mu[accept] = trial[accept]
                pending &= ~better
                if not pending.any():
                    break
                scale[pending] /= 2.0
            mu = new_mu
        return mu

    def _col_objective(self, mu, Gamma, nu) -> NDArray[np.float64]:
        eta = self._eta(mu, Gamma, nu)
        return np.sum(self.X * eta - self.family.log_partition(eta), axis=0)

    def update_gamma(self, mu, Gamma, nu):
        """Tangent step on Gamma; nu absorbs the QR factor so eta moves along the step."""
        for _ in range(self.opts.gamma_steps):
            eta = self._eta(mu, Gamma, nu)
            grad = (self.X - self.family.mean(eta)).T @ nu
            T = grad - Gamma @ (Gamma.T @ grad)
            if not np.any(T):
                break
            base = self.objective(mu, Gamma, nu)
            t = min(2.0 * self.gamma_step, 1.0)
            accepted = False
            for _ in range(self.opts.max_halvings):
                Q, R = sla.qr(Gamma + t * T, mode="economic")
                signs = np.sign(np.diag(R))
                signs[signs == 0] = 1.0
                Q, R = Q * signs, R * signs[:, None]
                trial_nu = nu @ R.T
                if self.objective(mu, Q, trial_nu) >= base:
                    Gamma, nu = Q, trial_nu
                    accepted = True
                    break
                t /= 2.0
            if not accepted:
                break
            self.gamma_step = t
        return Gamma, nu


def fit_bernoulli_pc(
    X: ArrayLike,
    d: int,
    opts: BernoulliOptions | None = None,
    *,
    basis: BasisMatrix | None = None,
    column_names: tuple[str, ...] = (),
) -> tuple[BernoulliPCModel, FittedReduction]:
    """Generalized PC for binary predictors by alternating maximization.

    With ``basis`` the coordinates are constrained to nu_y = beta f_y.
    """
    opts = opts or BernoulliOptions()
    family = Bernoulli()
    M = _as_binary(X, family)
    n, p = M.shape
    if not 1 <= d < p:
        raise DimensionMismatchError(f"need 1 <= d < p, got d={d}, p={p}")
    constant = np.nonzero(np.all(M == M[0], axis=0))[0]
    if constant.size:
        col = int(constant[0])
        name = column_names[col] if column_names else str(col + 1)
        raise DataFormatError(
            f"predictor {name!r} is constant across all rows; remove it before fitting",
            column=name,
        )
    F = None
    if basis is not None:
        if basis.n != n:
            raise DimensionMismatchError(f"basis has {basis.n} rows, X has {n}")
        F = basis.F

    fitter = _BernoulliFitter(M, d, opts, family, F)
    mu, Gamma, nu = fitter.start()
    value = fitter.objective(mu, Gamma, nu)
    history = [value]
    converged = False
    iterations = 0
    for iterations in range(1, opts.max_outer + 1):
        mu, nu = fitter.update_nu(mu, Gamma, nu)
        mu = fitter.update_mu(mu, Gamma, nu)
        Gamma, nu = fitter.update_gamma(mu, Gamma, nu)
        new_value = fitter.objective(mu, Gamma, nu)
        history.append(new_value)
        change = abs(new_value - value)
        value = new_value
        logger.debug(f"bernoulli-pc: outer {iterations} objective={value:.10g}")
        if change < opts.tol * max(1.0, abs(value)):
            converged = True
            break

    warnings: list[str] = []
    max_eta = float(np.max(np.abs(mu[None, :] + nu @ Gamma.T)))
    if max_eta >= opts.eta_cap:
        message = (
            f"|eta| reached the cap {opts.eta_cap:g}: the data are close to complete "
            "separation and the likelihood is unbounded"
        )
        logger.warning(message)
        warnings.append(message)
    if not converged:
        logger.warning(f"bernoulli-pc: no convergence after {opts.max_outer} outer iterations")

    model = BernoulliPCModel(mu=mu, Gamma=Gamma, nu=nu, history=history)
    loglik = family.loglik(M, fitter._eta(mu, Gamma, nu))
    fit = FittedReduction(
        method=Method.BERNOULLI_PC,
        subspace=Subspace(Gamma),
        coordinate_map=Gamma.copy(),
        loglik=loglik,
        d=d,
        n=n,
        p=p,
        r=basis.r if basis is not None else None,
        basis_kind=basis.kind if basis is not None else None,
        column_names=column_names,
        diagnostics={
            "outer_iterations": float(iterations),
            "converged": float(converged),
            "max_abs_eta": max_eta,
        },
        warnings=warnings,
    )
    return model, fit
