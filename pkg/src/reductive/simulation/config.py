"""Configuration models for the simulation studies.

A ``SimConfig`` fixes one sampling design; a ``StudySpec`` sweeps one of its
parameters over a grid. Both load from JSON for ``reductive simulate``.
"""

from __future__ import annotations

from enum import Enum
from typing import Literal

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

ESTIMATOR_NAMES = (
    "ols",
    "pc",
    "pfc",
    "sir",
    "pfc_pc",
    "pfc_all",
    "xpfc_grassmann",
    "pfc_poly",
    "pfc_delta",
)

SweepParam = Literal["n", "sigma_y", "sigma", "sigma_0", "k", "c"]


class SimModel(str, Enum):
    """Generating models for (Y, X)."""

    M7 = "m7"  # X_y = Gamma y + sigma eps
    M12 = "m12"  # X_y = Gamma y + sigma_0 Gamma_0 eps_0 + sigma Gamma eps
    M19 = "m19"  # X_y = Gamma y + Delta^{1/2} eps, Delta = A^T A
    M19_EXACTFIT = "m19-exactfit"  # Delta = (c I - Gamma Gamma^T) sigma_Y^2


def uniform_gamma(p: int) -> list[float]:
    """(1, ..., 1) / sqrt(p)."""
    return [1.0 / np.sqrt(p)] * p


class SimConfig(BaseModel):
    """One sampling design plus the estimators to run on it."""

    model: SimModel = Field(..., description="Generating model")
    n: int = Field(..., ge=4, description="Sample size")
    p: int = Field(10, ge=2, description="Number of predictors")
    sigma_y: float = Field(1.0, gt=0, description="Marginal standard deviation of Y")
    sigma: float = Field(1.0, gt=0, description="Error scale along Gamma")
    sigma_0: float = Field(1.0, gt=0, description="Error scale off Gamma (m12)")
    gamma: list[float] | None = Field(
        None,
        description="Unit p-vector; defaults to e_1 for m7/m12 and (1,...,1)/sqrt(p) for m19",
    )
    delta_seed: int = Field(2008, description="Seed of the fixed random Delta = A^T A (m19)")
    c: float | None = Field(None, description="Exact-fit constant; overrides k when set")
    k: float | None = Field(None, ge=0, description="Exact-fit exponent, c = 1 + 0.1 / 10^k")
    slices: int = Field(8, ge=2, description="Slices for SIR and the slice basis")
    reps: int = Field(100, ge=1)
    estimators: list[str] = Field(default_factory=lambda: ["ols", "pc", "pfc"])
    compute_mse: bool = Field(False, description="Also compute the scaled prediction MSE")
    seed: int = Field(0, ge=0)

    @field_validator("estimators")
    @classmethod
    def validate_estimators(cls, v: list[str]) -> list[str]:
        unknown = [name for name in v if name not in ESTIMATOR_NAMES]
        if unknown:
            raise ValueError(f"unknown estimators {unknown}; choose from {list(ESTIMATOR_NAMES)}")
        if not v:
            raise ValueError("at least one estimator is required")
        return v

    @model_validator(mode="after")
    def validate_design(self):
        if self.gamma is not None:
            g = np.asarray(self.gamma, dtype=float)
            if g.shape != (self.p,):
                raise ValueError(f"gamma has {g.size} entries, expected p = {self.p}")
            if abs(np.linalg.norm(g) - 1.0) > 1e-6:
                raise ValueError(f"gamma must have unit length, got {np.linalg.norm(g):.6g}")
        if self.model is SimModel.M19_EXACTFIT:
            if self.c is None and self.k is None:
                raise ValueError("m19-exactfit needs c or k")
            if self.exactfit_c <= 1.0:
                raise ValueError(
                    f"c = {self.exactfit_c} is not allowed: Delta = (cI - Gamma Gamma^T) "
                    "sigma_Y^2 is positive definite only for c > 1"
                )
        return self

    @property
    def exactfit_c(self) -> float:
        if self.c is not None:
            return self.c
        if self.k is None:
            raise ValueError("neither c nor k is set")
        return 1.0 + 0.1 / 10.0**self.k

    def gamma_vector(self) -> np.ndarray:
        if self.gamma is not None:
            g = np.asarray(self.gamma, dtype=float)
            return g / np.linalg.norm(g)
        if self.model in (SimModel.M19, SimModel.M19_EXACTFIT):
            return np.asarray(uniform_gamma(self.p))
        return np.eye(self.p)[:, 0]


class SweepSpec(BaseModel):
    """The swept parameter and its grid."""

    param: SweepParam
    values: list[float] = Field(..., min_length=1)

    @model_validator(mode="after")
    def validate_values(self):
        if self.param == "n" and any(v != int(v) or v < 4 for v in self.values):
            raise ValueError(f"sample sizes must be integers >= 4, got {self.values}")
        return self


class StudySpec(BaseModel):
    """A named simulation study: a base design swept along one parameter."""

    name: str
    base: SimConfig
    sweep: SweepSpec
    log_angles: bool = Field(False, description="Report the natural log of mean angles")

    def configs(self) -> list[tuple[int, float, SimConfig]]:
        """(sweep index, sweep value, design) for every grid point, in grid order."""
        out = []
        for i, value in enumerate(self.sweep.values):
            v: float | int = int(value) if self.sweep.param == "n" else float(value)
            update: dict[str, float | int | None] = {self.sweep.param: v}
            if self.sweep.param == "k":
                update["c"] = None
            cfg = SimConfig.model_validate({**self.base.model_dump(), **update})
            out.append((i, float(value), cfg))
        return out
