"""Ready-made studies reproducing the published figure designs.

Sweep grids for figures whose axes are only shown graphically are chosen to
cover the plotted range; pass a custom StudySpec to ``reductive simulate`` to
use another grid.
"""

from __future__ import annotations

from collections.abc import Callable

import numpy as np

from .config import SimConfig, SimModel, StudySpec, SweepSpec, uniform_gamma

SQRT2 = float(np.sqrt(2.0))

FIG1_N = [20, 40, 60, 80, 100, 150, 200, 300]
FIG1_SIGMA_Y = [0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0]
FIG1_SIGMA = [0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0]
FIG2_SIGMA = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 3.0]
FIG2_SIGMA_Y = [0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0]
FIG2_SIGMA_0 = [0.25, 0.5, 0.75, 1.0, 1.25, SQRT2, 1.5, 2.0, 3.0]
FIG3_N = [50, 100, 150, 200, 250]
FIG3_K = [0, 1, 2, 3, 4]

FIG1_ESTIMATORS = ["ols", "pc", "pfc"]
FIG2_ESTIMATORS = ["ols", "sir", "pfc_pc"]
FIG2D_ESTIMATORS = ["ols", "sir", "pfc_all", "xpfc_grassmann"]
FIG3_ESTIMATORS = ["ols", "pfc_poly", "sir", "pfc_delta"]


def _study(
    name: str, base: dict, param: str, values: list[float], reps: int, seed: int, **kw
) -> StudySpec:
    cfg = SimConfig(reps=reps, seed=seed, **base)
    return StudySpec(name=name, base=cfg, sweep=SweepSpec(param=param, values=values), **kw)


def _fig1(param: str, values: list[float], **extra) -> Callable[[int, int], StudySpec]:
    def build(reps: int, seed: int, name: str) -> StudySpec:
        base = {"model": SimModel.M7, "n": 40, "estimators": FIG1_ESTIMATORS, **extra}
        return _study(name, base, param, values, reps, seed)

    return build


def _fig2(param: str, values: list[float], estimators: list[str]):
    def build(reps: int, seed: int, name: str) -> StudySpec:
        base = {"model": SimModel.M12, "n": 250, "slices": 8, "estimators": estimators}
        return _study(name, base, param, values, reps, seed)

    return build


def _fig3a(reps: int, seed: int, name: str) -> StudySpec:
    base = {"model": SimModel.M19, "n": 50, "sigma_y": 15.0, "estimators": FIG3_ESTIMATORS}
    return _study(name, base, "n", FIG3_N, reps, seed, log_angles=True)


def _fig3b(reps: int, seed: int, name: str) -> StudySpec:
    base = {
        "model": SimModel.M19_EXACTFIT,
        "n": 50,
        "sigma_y": 15.0,
        "k": 0,
        "estimators": FIG3_ESTIMATORS,
    }
    return _study(name, base, "k", FIG3_K, reps, seed, log_angles=True)


PRESETS: dict[str, Callable[..., StudySpec]] = {
    "1a": _fig1("n", FIG1_N),
    "1b": _fig1("sigma_y", FIG1_SIGMA_Y),
    "1b-uniform": _fig1("sigma_y", FIG1_SIGMA_Y, gamma=uniform_gamma(10)),
    "1c": _fig1("sigma", FIG1_SIGMA),
    "1d": _fig1("sigma_y", FIG1_SIGMA_Y, compute_mse=True),
    "2a": _fig2("sigma", FIG2_SIGMA, FIG2_ESTIMATORS),
    "2b": _fig2("sigma_y", FIG2_SIGMA_Y, FIG2_ESTIMATORS),
    "2c": _fig2("sigma_0", FIG2_SIGMA_0, FIG2_ESTIMATORS),
    "2d": _fig2("sigma_0", FIG2_SIGMA_0, FIG2D_ESTIMATORS),
    "3a": _fig3a,
    "3b": _fig3b,
}


def preset_study(name: str, reps: int = 100, seed: int = 0) -> StudySpec:
    """Build the study for a figure preset; unknown names raise KeyError."""
    try:
        build = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown figure preset {name!r}; choose from {sorted(PRESETS)}") from None
    return build(reps, seed, f"figure-{name}")
