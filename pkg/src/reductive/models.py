from __future__ import annotations

from datetime import datetime
from enum import Enum
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, model_validator

# =============================================================================
# Basis and method vocabulary
# =============================================================================


class BasisFamily(str, Enum):
    """Families of basis functions f_y of the response."""

    LINEAR = "linear"
    POLYNOMIAL = "poly"
    SLICES = "slices"
    FOURIER = "fourier"


class BasisKind(BaseModel):
    """A basis family plus its size parameter.

    The CLI spelling is ``linear``, ``poly:3``, ``slices:8`` or ``fourier:2``.
    """

    model_config = ConfigDict(frozen=True)

    family: BasisFamily = Field(..., description="Basis family")
    order: int = Field(
        1, ge=1, description="Polynomial degree, number of slices, or number of harmonic pairs"
    )

    @model_validator(mode="after")
    def validate_order(self):
        """Slices need at least two bins; the linear basis has no size parameter."""
        if self.family is BasisFamily.SLICES and self.order < 2:
            raise ValueError(f"slice basis needs at least 2 slices, got {self.order}")
        if self.family is BasisFamily.LINEAR and self.order != 1:
            raise ValueError("the linear basis takes no order")
        return self

    @classmethod
    def linear(cls) -> BasisKind:
        return cls(family=BasisFamily.LINEAR)

    @classmethod
    def polynomial(cls, degree: int) -> BasisKind:
        return cls(family=BasisFamily.POLYNOMIAL, order=degree)

    @classmethod
    def slices(cls, h: int) -> BasisKind:
        return cls(family=BasisFamily.SLICES, order=h)

    @classmethod
    def fourier(cls, k: int) -> BasisKind:
        return cls(family=BasisFamily.FOURIER, order=k)

    @classmethod
    def parse(cls, spec: str) -> BasisKind:
        """Parse the CLI spelling of a basis kind."""
        text = spec.strip().lower()
        name, _, arg = text.partition(":")
        aliases = {"polynomial": "poly", "slice": "slices", "sir": "slices"}
        name = aliases.get(name, name)
        try:
            family = BasisFamily(name)
        except ValueError:
            raise ValueError(
                f"unknown basis {spec!r}; expected linear, poly:<k>, slices:<h> or fourier:<k>"
            ) from None
        if family is BasisFamily.LINEAR:
            if arg:
                raise ValueError(f"the linear basis takes no order: {spec!r}")
            return cls.linear()
        if not arg:
            raise ValueError(f"basis {spec!r} needs an order, e.g. {name}:3")
        try:
            order = int(arg)
        except ValueError:
            raise ValueError(f"basis order must be an integer in {spec!r}") from None
        return cls(family=family, order=order)

    @property
    def r(self) -> int:
        """Number of basis columns."""
        if self.family is BasisFamily.LINEAR:
            return 1
        if self.family is BasisFamily.POLYNOMIAL:
            return self.order
        if self.family is BasisFamily.SLICES:
            return self.order - 1
        return 2 * self.order

    def __str__(self) -> str:
        if self.family is BasisFamily.LINEAR:
            return "linear"
        return f"{self.family.value}:{self.order}"


class Method(str, Enum):
    """Estimator tags recorded on every fit."""

    PC = "pc"
    PFC = "pfc"
    EXTENDED_PC = "xpc"
    EXTENDED_PFC = "xpfc"
    GENERAL_PFC = "gpfc"
    GENERAL_PFC_KNOWN_DELTA = "gpfc-delta"
    GENERAL_PC_KNOWN_DELTA = "gpc-delta"
    SIR = "sir"
    OLS = "ols"
    BERNOULLI_PC = "bernoulli-pc"


class ExtendedStrategy(str, Enum):
    """How the extended-PFC likelihood is maximized."""

    PFC_PC = "pfc-pc"
    PFC_ALL = "pfc-all"
    SEQUENTIAL = "sequential"
    GRASSMANN = "grassmann"


class CandidateSource(str, Enum):
    """Where the winning extended-PFC direction came from."""

    PC = "PC"
    PFC = "PFC"
    RC = "RC"
    GRASSMANN_LOCAL = "grassmann-local"


# =============================================================================
# Result documents
# =============================================================================


class FitDocument(BaseModel):
    """JSON document written for every fit. Field names are stable across runs."""

    # exact fits have an unbounded likelihood; JSON carries it as Infinity
    model_config = ConfigDict(ser_json_inf_nan="constants")

    method: Method
    d: int
    r: int | None = Field(None, description="Number of basis columns (None when no basis is used)")
    n: int
    p: int
    basis: str | None = Field(None, description="Basis kind in CLI spelling")
    strategy: ExtendedStrategy | None = None
    column_names: list[str] = Field(default_factory=list)
    subspace_basis: list[list[float]] = Field(..., description="p x d orthonormal basis, row-major")
    coordinate_map: list[list[float]] = Field(..., description="p x d matrix W, reduction is W^T X")
    sigma2_hat: float | None = None
    delta_hat: list[list[float]] | None = None
    loglik: float
    cov_xy: list[float] | None = Field(None, description="Sample Cov(X, Y), OLS fits only")
    eigenvalues: list[float] | None = Field(
        None, description="Eigenvalues behind the estimate (SIR kernel, PC, PFC, ...)"
    )
    candidate_source: CandidateSource | None = None
    omega2_hat: list[list[float]] | None = None
    omega0_2_hat: list[list[float]] | None = None
    diagnostics: dict[str, float] = Field(default_factory=dict)
    warnings: list[str] = Field(default_factory=list)


class DimensionTest(BaseModel):
    """Likelihood-ratio test of a d-dimensional extended PFC model against the full model."""

    model_config = ConfigDict(ser_json_inf_nan="constants")

    d: int = Field(..., description="Tested dimension")
    lambda_d: float = Field(..., description="-2 log likelihood ratio")
    df: int = Field(..., description="Chi-squared degrees of freedom r(p - d)")
    p_value: float
    loglik: float = Field(..., description="Maximized extended-PFC log likelihood")
    npar: int = Field(..., description="Free parameter count of the d-dimensional model")
    aic: float
    bic: float


class DimensionSelection(BaseModel):
    """Outcome of sequential dimension testing."""

    chosen_d: int
    alpha: float
    loglik_full: float
    tests: list[DimensionTest] = Field(default_factory=list)


class RunManifest(BaseModel):
    """Written next to every CLI output so the run can be replayed."""

    command: str
    argv: list[str]
    config: dict[str, Any] = Field(default_factory=dict)
    seed: int | None = None
    code_version: str
    timestamp: datetime
    outputs: list[str] = Field(default_factory=list)


# =============================================================================
# Simulation study tables
# =============================================================================


class StudyRow(BaseModel):
    """Summary of one estimator at one value of the swept parameter."""

    sweep_param: str
    sweep_value: float
    estimator: str
    mean_angle_deg: float | None = Field(None, description="Mean largest principal angle")
    sd_angle_deg: float | None = None
    log_mean_angle: float | None = Field(None, description="Natural log of mean_angle_deg")
    mean_mse: float | None = Field(None, description="Mean scaled prediction MSE")
    n_ok: int = 0
    n_fail: int = Field(0, description="Replications whose fit failed and were excluded")
    source_counts: dict[str, int] = Field(
        default_factory=dict, description="Winning candidate set per replication"
    )
    angles: list[float] = Field(default_factory=list, description="Per-replication angles")
    mses: list[float] = Field(default_factory=list)


class StudyTable(BaseModel):
    """All rows of a simulation study, in sweep order then estimator order."""

    name: str
    model: str
    sweep_param: str
    estimators: list[str]
    reps: int
    seed: int
    log_angles: bool = False
    rows: list[StudyRow] = Field(default_factory=list)

    def row(self, sweep_value: float, estimator: str) -> StudyRow:
        for row in self.rows:
            if row.estimator == estimator and row.sweep_value == sweep_value:
                return row
        raise KeyError(f"no row for {estimator} at {self.sweep_param}={sweep_value}")

    def sweep_values(self) -> list[float]:
        seen: list[float] = []
        for row in self.rows:
            if row.sweep_value not in seen:
                seen.append(row.sweep_value)
        return seen
