"""Stateless, testable building blocks (estimators, optimizer, dimension tests) live here."""

from .estimators import (
    FittedReduction,
    fit_extended_pc,
    fit_extended_pfc,
    fit_general_pc_known_delta,
    fit_general_pfc,
    fit_general_pfc_known_delta,
    fit_ols,
    fit_pc,
    fit_pfc_iso,
    fit_sir,
    reduce,
)
from .expfam import BernoulliOptions, BernoulliPCModel, fit_bernoulli_pc
from .grassmann import GrassmannProblem, OptimOptions, optimize
from .prediction import forward_fit, predict, scaled_mse
from .selection import lrt_dimension, select_d

__all__ = [
    "BernoulliOptions",
    "BernoulliPCModel",
    "FittedReduction",
    "GrassmannProblem",
    "OptimOptions",
    "fit_bernoulli_pc",
    "fit_extended_pc",
    "fit_extended_pfc",
    "fit_general_pc_known_delta",
    "fit_general_pfc",
    "fit_general_pfc_known_delta",
    "fit_ols",
    "fit_pc",
    "fit_pfc_iso",
    "fit_sir",
    "forward_fit",
    "lrt_dimension",
    "optimize",
    "predict",
    "reduce",
    "scaled_mse",
    "select_d",
]
