"""Data generators for the simulation models.

Randomness is addressed by (seed, sweep, rep, stream) through a counter-based
Philox generator, so a replication's data do not depend on which thread runs it
or in what order.
"""

from __future__ import annotations

import logging
from functools import lru_cache

import numpy as np
from numpy.random import Generator, Philox, SeedSequence
from numpy.typing import NDArray

from reductive.linalg import Subspace, orthonormal_completion, spd_power
from reductive.moments import Dataset

from .config import SimConfig, SimModel

logger = logging.getLogger(__name__)

STREAM_Y = 0
STREAM_X = 1


def rng_for(seed: int, sweep: int, rep: int, stream: int) -> Generator:
    return Generator(Philox(SeedSequence(seed, spawn_key=(sweep, rep, stream))))


@lru_cache(maxsize=32)
def _random_delta(p: int, delta_seed: int) -> NDArray[np.float64]:
    A = Generator(Philox(SeedSequence(delta_seed))).standard_normal((p, p))
    delta = A.T @ A
    delta.setflags(write=False)
    return delta


def delta_matrix(cfg: SimConfig) -> NDArray[np.float64]:
    """Var(X | Y) of the design."""
    g = cfg.gamma_vector()
    P = np.outer(g, g)
    if cfg.model is SimModel.M7:
        return cfg.sigma**2 * np.eye(cfg.p)
    if cfg.model is SimModel.M12:
        return cfg.sigma_0**2 * (np.eye(cfg.p) - P) + cfg.sigma**2 * P
    if cfg.model is SimModel.M19:
        return _random_delta(cfg.p, cfg.delta_seed).copy()
    return (cfg.exactfit_c * np.eye(cfg.p) - P) * cfg.sigma_y**2


def generate(cfg: SimConfig, rep_index: int, sweep_index: int = 0) -> Dataset:
    """Draw one data set: Y ~ N(0, sigma_Y^2), then X | Y from the model."""
    g = cfg.gamma_vector()
    y = cfg.sigma_y * rng_for(cfg.seed, sweep_index, rep_index, STREAM_Y).standard_normal(cfg.n)
    noise_rng = rng_for(cfg.seed, sweep_index, rep_index, STREAM_X)
    signal = np.outer(y, g)

    if cfg.model is SimModel.M7:
        X = signal + cfg.sigma * noise_rng.standard_normal((cfg.n, cfg.p))
    elif cfg.model is SimModel.M12:
        G0 = orthonormal_completion(Subspace(g[:, None])).basis
        eps0 = noise_rng.standard_normal((cfg.n, cfg.p - 1))
        eps = noise_rng.standard_normal(cfg.n)
        X = signal + cfg.sigma_0 * eps0 @ G0.T + cfg.sigma * np.outer(eps, g)
    else:
        root = spd_power(delta_matrix(cfg), 0.5)
        X = signal + noise_rng.standard_normal((cfg.n, cfg.p)) @ root
    return Dataset(X=X, y=y)
