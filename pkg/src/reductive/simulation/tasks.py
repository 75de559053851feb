"""Study estimators and the per-replication job.

Every estimator targets a one-dimensional reduction, which is what the
studies compare.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from reductive.errors import ReductionError
from reductive.models import BasisKind, ExtendedStrategy
from reductive.moments import Dataset
from reductive.services.estimators import (
    FittedReduction,
    fit_extended_pfc,
    fit_general_pfc,
    fit_general_pfc_known_delta,
    fit_ols,
    fit_pc,
    fit_pfc_iso,
    fit_sir,
)
from reductive.services.prediction import forward_fit, scaled_mse

from .config import ESTIMATOR_NAMES, SimConfig
from .generators import generate
from .oracles import PopulationMoments, population_moments

logger = logging.getLogger(__name__)

Estimator = Callable[[Dataset, SimConfig, PopulationMoments], FittedReduction]


def _extended(strategy: ExtendedStrategy) -> Estimator:
    def fit(data: Dataset, cfg: SimConfig, pop: PopulationMoments) -> FittedReduction:
        return fit_extended_pfc(data, BasisKind.slices(cfg.slices), 1, strategy)

    return fit


ESTIMATORS: dict[str, Estimator] = {
    "ols": lambda data, cfg, pop: fit_ols(data),
    "pc": lambda data, cfg, pop: fit_pc(data, 1),
    "pfc": lambda data, cfg, pop: fit_pfc_iso(data, BasisKind.linear(), 1),
    "sir": lambda data, cfg, pop: fit_sir(data, cfg.slices, 1),
    "pfc_pc": _extended(ExtendedStrategy.PFC_PC),
    "pfc_all": _extended(ExtendedStrategy.PFC_ALL),
    "xpfc_grassmann": _extended(ExtendedStrategy.GRASSMANN),
    "pfc_poly": lambda data, cfg, pop: fit_general_pfc(data, BasisKind.polynomial(3), 1),
    "pfc_delta": lambda data, cfg, pop: fit_general_pfc_known_delta(
        data, BasisKind.slices(cfg.slices), 1, pop.sigma_res
    ),
}
assert tuple(ESTIMATORS) == ESTIMATOR_NAMES


@dataclass(frozen=True)
class ReplicateOutcome:
    """One estimator on one replication; ``error`` is set when the fit failed."""

    estimator: str
    rep: int
    angle_deg: float | None = None
    scaled_mse: float | None = None
    source: str | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def run_replicate(
    cfg: SimConfig,
    rep: int,
    sweep_index: int = 0,
    population: PopulationMoments | None = None,
) -> list[ReplicateOutcome]:
    """Draw replication ``rep`` and apply every configured estimator in order."""
    pop = population if population is not None else population_moments(cfg)
    data = generate(cfg, rep, sweep_index)
    outcomes = []
    for name in cfg.estimators:
        try:
            fit = ESTIMATORS[name](data, cfg, pop)
            angle = fit.subspace.angle_to(pop.true_subspace)
            mse = None
            if cfg.compute_mse:
                forward = forward_fit(fit, data)
                mse = scaled_mse(fit, forward, pop.sigma, pop.cov_xy, pop.sigma2_y)
            source = fit.candidate_source.value if fit.candidate_source else None
            outcomes.append(ReplicateOutcome(name, rep, angle, mse, source))
        except (ReductionError, np.linalg.LinAlgError) as e:
            logger.error(
                f"[study] {name} failed on sweep {sweep_index} rep {rep}: {e!s}", exc_info=True
            )
            outcomes.append(ReplicateOutcome(name, rep, error=str(e)))
    return outcomes
