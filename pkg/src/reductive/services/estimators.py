"""Likelihood-based estimators of the reductive subspace.

Every fit returns a ``FittedReduction``: an estimated subspace, the coordinate
map W whose columns give the reduction W^T X, variance estimates, and the
partially maximized log likelihood with additive constants dropped. Within a
model family the dropped constants are the same, so differences of ``loglik``
are likelihood ratios; comparing ``loglik`` across families is meaningless.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from math import comb

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg as sla

from reductive.basis import BasisMatrix, build_basis
from reductive.errors import (
    DimensionMismatchError,
    FitError,
    InsufficientDataError,
    RankDeficiencyError,
)
from reductive.linalg import (
    Subspace,
    check_symmetric,
    logdet,
    orthonormal_completion,
    spd_power,
    sym_eig,
)
from reductive.models import (
    BasisKind,
    CandidateSource,
    ExtendedStrategy,
    FitDocument,
    Method,
)
from reductive.moments import (
    Dataset,
    MomentSet,
    between_class_moments,
    compute_moments,
    marginal_moments,
)
from reductive.services.grassmann import GrassmannProblem, OptimOptions, optimize

logger = logging.getLogger(__name__)

CANDIDATE_RANK_RTOL = 1e-8
MAX_CANDIDATE_SUBSETS = 250_000
OVERFIT_RATIO = 2


# =============================================================================
# Result types
# =============================================================================


@dataclass(frozen=True, eq=False)
class ExtendedFitDetail:
    """Extra output of extended-model fits."""

    omega2_hat: NDArray[np.float64]
    omega0_2_hat: NDArray[np.float64]
    candidate_source: CandidateSource
    column_sources: tuple[CandidateSource, ...] = ()


@dataclass(eq=False)
class FittedReduction:
    """An estimated reductive subspace and the coordinate map W (reduction is W^T X)."""

    method: Method
    subspace: Subspace
    coordinate_map: NDArray[np.float64]
    loglik: float
    d: int
    n: int
    p: int
    r: int | None = None
    basis_kind: BasisKind | None = None
    strategy: ExtendedStrategy | None = None
    sigma2_hat: float | None = None
    delta_hat: NDArray[np.float64] | None = None
    eigenvalues: NDArray[np.float64] | None = None
    beta_hat: NDArray[np.float64] | None = None
    cov_xy: NDArray[np.float64] | None = None
    extended: ExtendedFitDetail | None = None
    column_names: tuple[str, ...] = ()
    diagnostics: dict[str, float] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    @property
    def candidate_source(self) -> CandidateSource | None:
        return self.extended.candidate_source if self.extended else None

    def reduce(self, Xnew: ArrayLike) -> NDArray[np.float64]:
        return reduce(self, Xnew)

    def to_document(self) -> FitDocument:
        """Serializable view of the fit with stable field names."""
        return FitDocument(
            method=self.method,
            d=self.d,
            r=self.r,
            n=self.n,
            p=self.p,
            basis=str(self.basis_kind) if self.basis_kind else None,
            strategy=self.strategy,
            column_names=list(self.column_names),
            subspace_basis=self.subspace.basis.tolist(),
            coordinate_map=self.coordinate_map.tolist(),
            sigma2_hat=self.sigma2_hat,
            delta_hat=self.delta_hat.tolist() if self.delta_hat is not None else None,
            loglik=float(self.loglik),
            cov_xy=self.cov_xy.tolist() if self.cov_xy is not None else None,
            eigenvalues=self.eigenvalues.tolist() if self.eigenvalues is not None else None,
            candidate_source=self.candidate_source,
            omega2_hat=self.extended.omega2_hat.tolist() if self.extended else None,
            omega0_2_hat=self.extended.omega0_2_hat.tolist() if self.extended else None,
            diagnostics={k: float(v) for k, v in self.diagnostics.items()},
            warnings=list(self.warnings),
        )


def _warn(warnings: list[str], message: str) -> None:
    logger.warning(message)
    warnings.append(message)


def _check_d(d: int, upper: int, what: str) -> None:
    if d < 1 or d > upper:
        raise DimensionMismatchError(f"d must satisfy 1 <= d <= {upper} for {what}, got d={d}")


def resolve_basis(data: Dataset, F: BasisMatrix | BasisKind) -> BasisMatrix:
    if isinstance(F, BasisKind):
        return build_basis(data.y, F)
    if F.n != data.n:
        raise DimensionMismatchError(f"basis has {F.n} rows but the data have n = {data.n}")
    return F


def _beta_hat(data: Dataset, basis: BasisMatrix, G: NDArray[np.float64]) -> NDArray[np.float64]:
    """beta = G^T X^T F (F^T F)^{-1}, the d x r coefficient of the fitted basis."""
    coef, *_ = sla.lstsq(basis.F, data.centered() @ G)
    return coef.T


def _isotropic_loglik(n: int, p: int, sigma2: float) -> float:
    return -0.5 * n * p * (np.log(sigma2) + 1.0)


def _require_positive_variance(sigma2: float, what: str) -> None:
    if not sigma2 > 0.0:
        raise RankDeficiencyError(
            f"{what}: estimated error variance is {sigma2:.3e}; the predictors lie in a "
            "d-dimensional subspace",
            eigenvalue=sigma2,
        )


# =============================================================================
# Isotropic models: PC and PFC
# =============================================================================


def _fit_isotropic(
    moments: MomentSet, d: int, method: Method, data: Dataset
) -> tuple[Subspace, float, float]:
    """Top-d eigenvectors of Sigma_fit with sigma^2 = (tr Sigma - sum_{i<=d} lambda_fit_i) / p."""
    if d > moments.rank_fit:
        raise RankDeficiencyError(
            f"{method.value}: d = {d} exceeds rank(Sigma_fit) = {moments.rank_fit}",
            eigenvalue=float(moments.eig_fit.eigenvalues[min(d, moments.p) - 1]),
        )
    G = moments.eig_fit.top(d)
    sigma2 = float(
        (np.trace(moments.sigma_hat) - np.sum(moments.eig_fit.eigenvalues[:d])) / moments.p
    )
    _require_positive_variance(sigma2, method.value)
    return Subspace(G), sigma2, _isotropic_loglik(data.n, data.p, sigma2)


def fit_pc(
    data: Dataset, d: int, *, between_class: bool = False, standardize: bool = False
) -> FittedReduction:
    """Principal components: the MLE of the reductive subspace under the isotropic PC model.

    ``between_class`` computes components from the covariance of the class
    means of replicated responses. ``standardize`` works on the correlation
    matrix instead; the estimate then no longer targets the reductive subspace
    and a warning is recorded.
    """
    _check_d(d, data.p - 1, "principal components")
    warnings: list[str] = []
    Xc = data.centered()
    variances = np.mean(Xc**2, axis=0)
    if not np.any(variances > 0.0):
        raise FitError("all predictors have zero variance")

    diagnostics: dict[str, float] = {}
    if standardize:
        if np.any(variances <= 0.0):
            zero = [data.column_names[j] for j in np.nonzero(variances <= 0.0)[0]]
            raise FitError(f"cannot standardize zero-variance predictors: {zero}")
        scale = 1.0 / np.sqrt(variances)
        scaled = Dataset(X=data.X * scale, y=data.y, column_names=data.column_names)
        fit = fit_pc(scaled, d, between_class=between_class)
        W = fit.coordinate_map * scale[:, None]
        _warn(
            warnings,
            "components of the correlation matrix: standardizing by diag(Sigma_hat) does "
            "not preserve the reductive subspace",
        )
        fit.subspace = Subspace.from_matrix(W)
        fit.coordinate_map = W
        fit.diagnostics["standardized"] = 1.0
        fit.warnings.extend(warnings)
        return fit

    if between_class:
        moments = between_class_moments(data)
        diagnostics["n_classes"] = float(moments.r + 1)
    else:
        moments = marginal_moments(data)
    subspace, sigma2, loglik = _fit_isotropic(moments, d, Method.PC, data)
    logger.debug(f"pc: d={d} sigma2={sigma2:.6g} loglik={loglik:.6g}")
    return FittedReduction(
        method=Method.PC,
        subspace=subspace,
        coordinate_map=subspace.basis.copy(),
        loglik=loglik,
        d=d,
        n=data.n,
        p=data.p,
        sigma2_hat=sigma2,
        eigenvalues=moments.eig_fit.eigenvalues.copy(),
        column_names=data.column_names,
        diagnostics=diagnostics,
        warnings=warnings,
    )


def fit_pfc_iso(data: Dataset, F: BasisMatrix | BasisKind, d: int) -> FittedReduction:
    """Principal fitted components: top-d eigenvectors of Sigma_fit."""
    basis = resolve_basis(data, F)
    _check_d(d, data.p, "principal fitted components")
    moments = compute_moments(data, basis)
    subspace, sigma2, loglik = _fit_isotropic(moments, d, Method.PFC, data)
    logger.debug(f"pfc: d={d} r={basis.r} sigma2={sigma2:.6g} loglik={loglik:.6g}")
    return FittedReduction(
        method=Method.PFC,
        subspace=subspace,
        coordinate_map=subspace.basis.copy(),
        loglik=loglik,
        d=d,
        n=data.n,
        p=data.p,
        r=basis.r,
        basis_kind=basis.kind,
        sigma2_hat=sigma2,
        eigenvalues=moments.eig_fit.eigenvalues.copy(),
        beta_hat=_beta_hat(data, basis, subspace.basis),
        column_names=data.column_names,
        warnings=list(basis.warnings),
    )


def fit_extended_pc(data: Dataset, d: int) -> FittedReduction:
    """Extended PC estimate: the span of the first d principal components.

    Only the span is estimable, and it is reliable only when the top-d
    eigenvalues of Sigma_hat dominate the rest; ``signal_dominance`` is
    lambda_d - lambda_{d+1} and is not positive when they do not.
    """
    fit = fit_pc(data, d)
    lam = fit.eigenvalues
    assert lam is not None
    fit.method = Method.EXTENDED_PC
    fit.sigma2_hat = None
    # -(n/2) log|G0^T Sigma G0|; the Omega^2 term is not estimable
    fit.loglik = float(-0.5 * data.n * np.sum(np.log(lam[d:])))
    fit.diagnostics["signal_dominance"] = float(lam[d - 1] - lam[d])
    return fit


# =============================================================================
# Extended PFC model
# =============================================================================


class ExtendedPFCObjective:
    """L(G) = -(n/2) log|G0^T Sigma G0| - (n/2) log|G^T Sigma_res G|.

    Evaluated as -(n/2)[log|Sigma| + log|G^T Sigma^{-1} G| + log|G^T Sigma_res G|
    - 2 log|G^T G|], which equals the completion form at orthonormal G and is
    invariant to any invertible change of basis, so no completion is built.
    """

    def __init__(self, moments: MomentSet) -> None:
        self.n = moments.n
        self.p = moments.p
        self.sigma_inv = spd_power(moments.sigma_hat, -1.0)
        self.sigma_res = moments.sigma_res
        self.logdet_sigma = logdet(moments.sigma_hat)

    def _basis(self, B: ArrayLike) -> NDArray[np.float64]:
        M = np.asarray(B, dtype=float)
        if M.ndim == 1:
            M = M.reshape(-1, 1)
        if M.shape[0] != self.p:
            raise DimensionMismatchError(f"basis has {M.shape[0]} rows, expected p = {self.p}")
        return M

    def __call__(self, B: ArrayLike) -> float:
        G = self._basis(B)
        s_inv, l_inv = np.linalg.slogdet(G.T @ self.sigma_inv @ G)
        s_gram, l_gram = np.linalg.slogdet(G.T @ G)
        if s_inv <= 0 or s_gram <= 0:
            return float("nan")
        s_res, l_res = np.linalg.slogdet(G.T @ self.sigma_res @ G)
        if s_res <= 0:
            # Sigma_res singular along span(G): unbounded likelihood
            return float("inf")
        return float(-0.5 * self.n * (self.logdet_sigma + l_inv + l_res - 2.0 * l_gram))

    def gradient(self, B: ArrayLike) -> NDArray[np.float64]:
        G = self._basis(B)
        inv_part = self.sigma_inv @ G @ np.linalg.inv(G.T @ self.sigma_inv @ G)
        res_part = self.sigma_res @ G @ np.linalg.inv(G.T @ self.sigma_res @ G)
        gram_part = G @ np.linalg.inv(G.T @ G)
        return -self.n * (inv_part + res_part - 2.0 * gram_part)

    def problem(self, d: int) -> GrassmannProblem:
        return GrassmannProblem(
            objective=self, p=self.p, d=d, gradient=self.gradient, name="extended-pfc"
        )


def eval_extended_pfc_objective(S: Subspace | ArrayLike, moments: MomentSet) -> float:
    """Extended-PFC partially maximized log likelihood at span(S)."""
    B = S.basis if isinstance(S, Subspace) else S
    return ExtendedPFCObjective(moments)(B)


def extended_pfc_objective_explicit(S: Subspace, moments: MomentSet) -> float:
    """The same objective through an explicit orthonormal completion G0."""
    if S.d == S.p:
        return -0.5 * moments.n * logdet(moments.sigma_res)
    G0 = orthonormal_completion(S).basis
    G = S.basis
    return -0.5 * moments.n * (
        logdet(G0.T @ moments.sigma_hat @ G0) + logdet(G.T @ moments.sigma_res @ G)
    )


@dataclass(frozen=True, eq=False)
class _Candidate:
    vector: NDArray[np.float64]
    source: CandidateSource
    index: int


def _candidate_set(moments: MomentSet, strategy: ExtendedStrategy) -> list[_Candidate]:
    """PC directions, then PFC directions, then RC directions, each in eigenvalue order."""
    candidates = [
        _Candidate(v, CandidateSource.PC, j) for j, v in enumerate(moments.eig_sigma.eigenvectors.T)
    ]
    if strategy is ExtendedStrategy.PFC_PC or strategy is ExtendedStrategy.SEQUENTIAL:
        return candidates
    n_fit = min(moments.r, moments.rank_fit)
    candidates += [
        _Candidate(v, CandidateSource.PFC, j)
        for j, v in enumerate(moments.eig_fit.eigenvectors.T[:n_fit])
    ]
    candidates += [
        _Candidate(v, CandidateSource.RC, j) for j, v in enumerate(moments.eig_res.eigenvectors.T)
    ]
    return candidates


@dataclass
class _Search:
    subspace: Subspace
    value: float
    sources: tuple[CandidateSource, ...]


def _subset_subspace(vectors: list[NDArray[np.float64]]) -> Subspace | None:
    try:
        return Subspace.from_matrix(np.column_stack(vectors), rank_rtol=CANDIDATE_RANK_RTOL)
    except RankDeficiencyError:
        return None


def _search_subsets(
    objective: ExtendedPFCObjective, candidates: list[_Candidate], d: int
) -> _Search:
    """Evaluate the objective on every d-subset; ties keep the earliest subset."""
    total = comb(len(candidates), d)
    if total > MAX_CANDIDATE_SUBSETS:
        raise FitError(
            f"{total} candidate subsets exceed the limit of {MAX_CANDIDATE_SUBSETS}; "
            "use the sequential or grassmann strategy"
        )
    best: _Search | None = None
    skipped = 0
    for subset in itertools.combinations(candidates, d):
        S = _subset_subspace([c.vector for c in subset])
        if S is None:
            skipped += 1
            continue
        value = objective(S.basis)
        if np.isnan(value):
            skipped += 1
            continue
        if best is None or value > best.value:
            best = _Search(S, value, tuple(c.source for c in subset))
    if skipped:
        logger.debug(f"skipped {skipped} of {total} rank-deficient candidate subsets")
    if best is None:
        raise FitError("every candidate subset was rank deficient")
    return best


def _search_sequential(
    objective: ExtendedPFCObjective, candidates: list[_Candidate], d: int
) -> _Search:
    chosen: list[_Candidate] = []
    remaining = list(candidates)
    best: _Search | None = None
    for _ in range(d):
        step_best: tuple[int, _Search] | None = None
        for k, candidate in enumerate(remaining):
            S = _subset_subspace([c.vector for c in chosen] + [candidate.vector])
            if S is None:
                continue
            value = objective(S.basis)
            if np.isnan(value):
                continue
            if step_best is None or value > step_best[1].value:
                step_best = (
                    k,
                    _Search(S, value, tuple(c.source for c in chosen) + (candidate.source,)),
                )
        if step_best is None:
            raise FitError("sequential search found no admissible direction")
        chosen.append(remaining.pop(step_best[0]))
        best = step_best[1]
    assert best is not None
    return best


def _full_model_fit(data: Dataset, basis: BasisMatrix, moments: MomentSet) -> FittedReduction:
    S = Subspace(np.eye(data.p))
    return FittedReduction(
        method=Method.EXTENDED_PFC,
        subspace=S,
        coordinate_map=np.eye(data.p),
        loglik=-0.5 * data.n * logdet(moments.sigma_res),
        d=data.p,
        n=data.n,
        p=data.p,
        r=basis.r,
        basis_kind=basis.kind,
        beta_hat=_beta_hat(data, basis, np.eye(data.p)),
        extended=ExtendedFitDetail(
            omega2_hat=moments.sigma_res.copy(),
            omega0_2_hat=np.zeros((0, 0)),
            candidate_source=CandidateSource.PC,
        ),
        column_names=data.column_names,
        warnings=list(basis.warnings),
    )


def fit_extended_pfc(
    data: Dataset,
    F: BasisMatrix | BasisKind,
    d: int,
    strategy: ExtendedStrategy | str = ExtendedStrategy.PFC_ALL,
    *,
    seeds: list[Subspace] | None = None,
    options: OptimOptions | None = None,
) -> FittedReduction:
    """Maximize the extended-PFC likelihood over d-dimensional subspaces.

    ``pfc-pc`` and ``pfc-all`` evaluate every d-subset of their candidate
    directions; ``sequential`` adds PC directions greedily; ``grassmann``
    ascends from the best ``pfc-all`` subset (and from any extra ``seeds``).
    At d = p the model is the full multivariate linear model.
    """
    strategy = ExtendedStrategy(strategy)
    basis = resolve_basis(data, F)
    _check_d(d, data.p, "the extended PFC model")
    moments = compute_moments(data, basis)
    if d == data.p:
        return _full_model_fit(data, basis, moments)
    objective = ExtendedPFCObjective(moments)

    search_strategy = ExtendedStrategy.PFC_ALL if strategy is ExtendedStrategy.GRASSMANN else strategy
    candidates = _candidate_set(moments, search_strategy)
    if strategy is ExtendedStrategy.SEQUENTIAL:
        best = _search_sequential(objective, candidates, d)
    else:
        best = _search_subsets(objective, candidates, d)
    source = best.sources[0]
    diagnostics: dict[str, float] = {"candidate_loglik": best.value}

    if strategy is ExtendedStrategy.GRASSMANN:
        starts = [best.subspace] + [s for s in seeds or [] if (s.p, s.d) == (data.p, d)]
        problem = objective.problem(d)
        runs = []
        for start in starts:
            if not np.isfinite(objective(start.basis)):
                continue
            runs.append(optimize(problem, start, options))
        if not runs:
            raise FitError("no finite starting subspace for the grassmann strategy")
        result = max(runs, key=lambda run: run.value)
        if result.value > best.value:
            best = _Search(result.subspace, result.value, best.sources)
        source = CandidateSource.GRASSMANN_LOCAL
        diagnostics["iterations"] = float(result.iterations)
        diagnostics["converged"] = float(result.converged)

    G = best.subspace.basis
    G0 = orthonormal_completion(best.subspace).basis
    logger.debug(f"xpfc[{strategy.value}]: d={d} loglik={best.value:.10g} source={source.value}")
    return FittedReduction(
        method=Method.EXTENDED_PFC,
        subspace=best.subspace,
        coordinate_map=G.copy(),
        loglik=float(best.value),
        d=d,
        n=data.n,
        p=data.p,
        r=basis.r,
        basis_kind=basis.kind,
        strategy=strategy,
        beta_hat=_beta_hat(data, basis, G),
        extended=ExtendedFitDetail(
            omega2_hat=check_symmetric(G.T @ moments.sigma_res @ G),
            omega0_2_hat=check_symmetric(G0.T @ moments.sigma_hat @ G0),
            candidate_source=source,
            column_sources=best.sources,
        ),
        column_names=data.column_names,
        diagnostics=diagnostics,
        warnings=list(basis.warnings),
    )


# =============================================================================
# General models with unstructured error covariance
# =============================================================================


def _delta_eigs(delta: NDArray[np.float64], target: NDArray[np.float64]):
    """Delta^{-1/2} and the eigendecomposition of Delta^{-1/2} target Delta^{-1/2}."""
    root_inv = spd_power(delta, -0.5)
    return root_inv, sym_eig(root_inv @ target @ root_inv)


def _checked_delta(Delta: ArrayLike, p: int) -> NDArray[np.float64]:
    D = check_symmetric(Delta, "Delta")
    if D.shape != (p, p):
        raise DimensionMismatchError(f"Delta must be {p}x{p}, got {D.shape}")
    return D


def k_objective(moments: MomentSet, D: ArrayLike, d: int) -> float:
    """K(D) = -(n/2)[log|D| + tr(D^{-1} Sigma_res) + sum_{i>d} lambda_i(D^{-1} Sigma_fit)]."""
    Dm = _checked_delta(D, moments.p)
    _, eig = _delta_eigs(Dm, moments.sigma_fit)
    tail = float(np.sum(np.clip(eig.eigenvalues[d:], 0.0, None)))
    trace_term = float(np.trace(np.linalg.solve(Dm, moments.sigma_res)))
    return -0.5 * moments.n * (logdet(Dm) + trace_term + tail)


def _general_pfc(
    data: Dataset,
    basis: BasisMatrix,
    moments: MomentSet,
    d: int,
    delta: NDArray[np.float64],
    method: Method,
) -> FittedReduction:
    if d > moments.rank_fit:
        raise RankDeficiencyError(
            f"{method.value}: d = {d} exceeds rank(Sigma_fit) = {moments.rank_fit}",
            eigenvalue=float(moments.eig_fit.eigenvalues[min(d, moments.p) - 1]),
        )
    root_inv, eig = _delta_eigs(delta, moments.sigma_fit)
    W = root_inv @ eig.top(d)
    overfit = float(np.sum(np.clip(eig.eigenvalues[d:], 0.0, None)))
    return FittedReduction(
        method=method,
        subspace=Subspace.from_matrix(W),
        coordinate_map=W,
        loglik=k_objective(moments, delta, d),
        d=d,
        n=data.n,
        p=data.p,
        r=basis.r,
        basis_kind=basis.kind,
        delta_hat=delta.copy(),
        eigenvalues=eig.eigenvalues.copy(),
        column_names=data.column_names,
        diagnostics={"overfit_term": overfit},
        warnings=list(basis.warnings),
    )


def fit_general_pfc_known_delta(
    data: Dataset, F: BasisMatrix | BasisKind, d: int, Delta: ArrayLike
) -> FittedReduction:
    """W = Delta^{-1/2} times the top-d eigenvectors of Delta^{-1/2} Sigma_fit Delta^{-1/2}."""
    basis = resolve_basis(data, F)
    _check_d(d, data.p, "general PFC")
    delta = _checked_delta(Delta, data.p)
    moments = compute_moments(data, basis)
    return _general_pfc(data, basis, moments, d, delta, Method.GENERAL_PFC_KNOWN_DELTA)


def fit_general_pc_known_delta(data: Dataset, d: int, Delta: ArrayLike) -> FittedReduction:
    """General PC model with known Delta: eigenvectors of Delta^{-1/2} Sigma Delta^{-1/2}."""
    _check_d(d, data.p - 1, "general PC")
    delta = _checked_delta(Delta, data.p)
    Xc = data.centered()
    sigma = check_symmetric(Xc.T @ Xc / data.n)
    root_inv, eig = _delta_eigs(delta, sigma)
    W = root_inv @ eig.top(d)
    tail = float(np.sum(eig.eigenvalues[d:]))
    return FittedReduction(
        method=Method.GENERAL_PC_KNOWN_DELTA,
        subspace=Subspace.from_matrix(W),
        coordinate_map=W,
        loglik=-0.5 * data.n * (logdet(delta) + tail),
        d=d,
        n=data.n,
        p=data.p,
        delta_hat=delta.copy(),
        eigenvalues=eig.eigenvalues.copy(),
        column_names=data.column_names,
    )


def fit_general_pfc(data: Dataset, F: BasisMatrix | BasisKind, d: int) -> FittedReduction:
    """General PFC with Delta estimated by Sigma_res."""
    basis = resolve_basis(data, F)
    _check_d(d, data.p, "general PFC")
    if data.n <= data.p:
        raise InsufficientDataError(f"general PFC needs n > p, got n={data.n}, p={data.p}")
    moments = compute_moments(data, basis)
    try:
        spd_power(moments.sigma_res, -0.5)
    except RankDeficiencyError as exc:
        raise RankDeficiencyError(
            f"Sigma_res is singular, so Delta cannot be estimated: {exc}", eigenvalue=exc.eigenvalue
        ) from exc
    fit = _general_pfc(data, basis, moments, d, moments.sigma_res, Method.GENERAL_PFC)
    if basis.r > OVERFIT_RATIO * d:
        _warn(
            fit.warnings,
            f"r = {basis.r} is much larger than d = {d}; the overfit term "
            f"{fit.diagnostics['overfit_term']:.4g} may matter",
        )
    return fit


def fit_sir(data: Dataset, h: int, d: int) -> FittedReduction:
    """Sliced inverse regression with h slices, back-transformed to the X scale."""
    if data.n <= data.p:
        raise InsufficientDataError(f"SIR needs n > p, got n={data.n}, p={data.p}")
    if h < d + 1:
        raise DimensionMismatchError(f"SIR with d = {d} needs at least {d + 1} slices, got {h}")
    _check_d(d, data.p, "SIR")
    basis = build_basis(data.y, BasisKind.slices(h))
    moments = compute_moments(data, basis)
    root_inv, eig = _delta_eigs(moments.sigma_hat, moments.sigma_fit)
    W = root_inv @ eig.top(d)
    lam = eig.eigenvalues
    warnings = list(basis.warnings)
    if lam[0] < 2.0 * basis.r / data.n:
        _warn(
            warnings,
            f"weak SIR signal: largest kernel eigenvalue {lam[0]:.4g} < 2r/n = "
            f"{2.0 * basis.r / data.n:.4g}; the estimated subspace may be arbitrary",
        )
    top = lam[:d]
    loglik = float("inf") if np.any(top >= 1.0) else float(-0.5 * data.n * np.sum(np.log1p(-top)))
    return FittedReduction(
        method=Method.SIR,
        subspace=Subspace.from_matrix(W),
        coordinate_map=W,
        loglik=loglik,
        d=d,
        n=data.n,
        p=data.p,
        r=basis.r,
        basis_kind=basis.kind,
        eigenvalues=lam.copy(),
        column_names=data.column_names,
        warnings=warnings,
    )


def fit_ols(data: Dataset) -> FittedReduction:
    """Ordinary least squares of y on X; the reduction is alpha_hat^T X with d = 1."""
    if data.n <= data.p + 1:
        raise InsufficientDataError(f"OLS needs n > p + 1, got n={data.n}, p={data.p}")
    design = np.column_stack([np.ones(data.n), data.X])
    coef, _, rank, _ = sla.lstsq(design, data.y)
    if rank < data.p + 1:
        raise RankDeficiencyError(f"singular design: rank {rank} < {data.p + 1}")
    alpha = coef[1:]
    residuals = data.y - design @ coef
    sigma2_y_given_x = float(np.mean(residuals**2))

    Xc = data.centered()
    yc = data.y - data.y.mean()
    C = sample_cov_xy(data)
    sigma2_y = float(np.mean(yc**2))
    sigma = check_symmetric(Xc.T @ Xc / data.n)
    sigma_inv_c = np.linalg.solve(sigma, C)
    explained = float(C @ sigma_inv_c)
    diagnostics = {
        "intercept": float(coef[0]),
        "sigma2_y": sigma2_y,
        "sigma2_y_given_x": sigma2_y_given_x,
        "r_squared": explained / sigma2_y if sigma2_y > 0 else 0.0,
        "proportionality_angle_deg": Subspace.from_matrix(alpha).angle_to(
            Subspace.from_matrix(sigma_inv_c)
        ),
    }
    if sigma2_y > explained:
        diagnostics["res_scale"] = explained / (sigma2_y - explained)

    loglik = float("inf") if sigma2_y_given_x <= 0 else -0.5 * data.n * np.log(sigma2_y_given_x)
    return FittedReduction(
        method=Method.OLS,
        subspace=Subspace.from_matrix(alpha),
        coordinate_map=alpha.reshape(-1, 1),
        loglik=loglik,
        d=1,
        n=data.n,
        p=data.p,
        r=1,
        basis_kind=BasisKind.linear(),
        cov_xy=C,
        column_names=data.column_names,
        diagnostics=diagnostics,
    )


def sample_cov_xy(data: Dataset) -> NDArray[np.float64]:
    """C_hat = sample Cov(X, Y) with divisor n."""
    return data.centered().T @ (data.y - data.y.mean()) / data.n


# =============================================================================
# Applying a fit
# =============================================================================


def reduce(fit: FittedReduction, Xnew: ArrayLike) -> NDArray[np.float64]:
    """Rows W^T x for each row x of Xnew."""
    X = np.asarray(Xnew, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2 or X.shape[1] != fit.p:
        raise DimensionMismatchError(f"expected rows of length p = {fit.p}, got shape {X.shape}")
    return X @ fit.coordinate_map
