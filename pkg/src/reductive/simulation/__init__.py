"""Simulation models, population oracles and the replication harness."""

from .config import SimConfig, SimModel, StudySpec, SweepSpec
from .generators import generate, rng_for
from .oracles import PopulationMoments, delta_sir_gap, ols_oracles, population_moments
from .presets import PRESETS, preset_study
from .study import run_study

__all__ = [
    "PRESETS",
    "PopulationMoments",
    "SimConfig",
    "SimModel",
    "StudySpec",
    "SweepSpec",
    "delta_sir_gap",
    "generate",
    "ols_oracles",
    "population_moments",
    "preset_study",
    "rng_for",
    "run_study",
]
