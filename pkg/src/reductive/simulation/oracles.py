"""Closed-form population quantities for the simulation designs.

With the linear basis f_y = y - E(Y), Var(f_Y) = sigma_Y^2 and every model
here has Sigma_fit = Gamma Gamma^T sigma_Y^2 and Sigma_res = Var(X | Y).
The joint moments of (Y, X) needed by the prediction MSE follow from the same
quantities: Cov(X, Y) = Gamma sigma_Y^2, E(X) = 0, E(Y) = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.stats import norm, truncnorm

from reductive.errors import ReductionError
from reductive.linalg import Subspace, symmetrize
from reductive.models import BasisFamily, BasisKind
from reductive.moments import MomentSet

from .config import SimConfig, SimModel
from .generators import delta_matrix


@dataclass(frozen=True, eq=False)
class PopulationMoments:
    """Population Sigma = Sigma_fit + Sigma_res and the true reductive subspace."""

    sigma: NDArray[np.float64]
    sigma_fit: NDArray[np.float64]
    sigma_res: NDArray[np.float64]
    true_subspace: Subspace
    cov_xy: NDArray[np.float64]
    sigma2_y: float

    def as_moments(self, n: int = 1) -> MomentSet:
        """Package the population matrices as a MomentSet (r = 1), for objective evaluation."""
        p = self.sigma.shape[0]
        return MomentSet(
            sigma_hat=self.sigma.copy(),
            sigma_fit=self.sigma_fit.copy(),
            sigma_res=self.sigma_res.copy(),
            xbar=np.zeros(p),
            n=n,
            r=1,
        )


def population_moments(
    cfg: SimConfig, basis: BasisKind | None = None
) -> PopulationMoments:
    if basis is not None and basis.family is not BasisFamily.LINEAR:
        raise ReductionError(
            f"closed-form population moments need the linear basis, got {basis}"
        )
    g = cfg.gamma_vector()
    sigma_fit = np.outer(g, g) * cfg.sigma_y**2
    sigma_res = symmetrize(delta_matrix(cfg))
    if cfg.model in (SimModel.M19, SimModel.M19_EXACTFIT):
        truth = Subspace.from_matrix(np.linalg.solve(sigma_res, g))
    else:
        truth = Subspace.from_matrix(g)
    return PopulationMoments(
        sigma=symmetrize(sigma_fit + sigma_res),
        sigma_fit=sigma_fit,
        sigma_res=sigma_res,
        true_subspace=truth,
        cov_xy=g * cfg.sigma_y**2,
        sigma2_y=cfg.sigma_y**2,
    )


def ols_oracles(
    cfg: SimConfig,
) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    """Population OLS coefficient, asymptotic Var of sqrt(n)(alpha_hat - alpha), predictor correlations.

    With R = sigma_Y^2 / (sigma_Y^2 + sigma^2): alpha = R Gamma and
    Var = R Q_Gamma + R (1 - R) P_Gamma.
    """
    if cfg.model is not SimModel.M7:
        raise ReductionError(f"OLS oracles are closed form for m7 only, got {cfg.model.value}")
    g = cfg.gamma_vector()
    s2y, s2 = cfg.sigma_y**2, cfg.sigma**2
    R = s2y / (s2y + s2)
    P = np.outer(g, g)
    Q = np.eye(cfg.p) - P
    alpha = R * g
    var_alpha = R * Q + R * (1.0 - R) * P
    sd = np.sqrt(s2 + g**2 * s2y)
    rho = P * s2y / np.outer(sd, sd)
    np.fill_diagonal(rho, 1.0)
    return alpha, var_alpha, rho


def mean_within_slice_variance(sigma_y: float, h: int) -> float:
    """E Var(Y | Y in H_k) for Y ~ N(0, sigma_Y^2) cut at its h equal-probability quantiles."""
    if h < 1:
        raise ValueError(f"h must be >= 1, got {h}")
    cuts = norm.ppf(np.linspace(0.0, 1.0, h + 1))
    variances = truncnorm.var(cuts[:-1], cuts[1:])
    return float(sigma_y**2 * np.mean(variances))


def delta_sir_gap(cfg: SimConfig, h: int) -> NDArray[np.float64]:
    """Delta - Delta_sir = Gamma Gamma^T E(Var(Y | Y in H_k))."""
    if cfg.model not in (SimModel.M19, SimModel.M19_EXACTFIT):
        raise ReductionError(f"the slicing gap is defined for the m19 family, got {cfg.model.value}")
    g = cfg.gamma_vector()
    return np.outer(g, g) * mean_within_slice_variance(cfg.sigma_y, h)
