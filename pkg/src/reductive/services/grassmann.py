"""Gradient ascent over the Grassmann manifold of d-dimensional subspaces of R^p.

Objectives are functions of a p x d basis matrix that depend only on its span.
Each iteration projects the Euclidean gradient onto the tangent space at the
current basis, steps along it with backtracking, and re-orthonormalizes by QR.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, Field
from scipy import linalg as sla

from reductive.errors import DimensionMismatchError, FitError
from reductive.linalg import Subspace

logger = logging.getLogger(__name__)

ObjectiveFn = Callable[[NDArray[np.float64]], float]
GradientFn = Callable[[NDArray[np.float64]], NDArray[np.float64]]

ARMIJO_C = 1e-4
INVARIANCE_RTOL = 1e-8
ROUNDOFF_RTOL = 64 * np.finfo(float).eps
GRADIENT_DECREASE = 0.9


@dataclass(frozen=True)
class GrassmannProblem:
    """A span-invariant objective plus an optional Euclidean gradient."""

    objective: ObjectiveFn
    p: int
    d: int
    gradient: GradientFn | None = None
    name: str = "objective"

    def __post_init__(self) -> None:
        if not 1 <= self.d <= self.p:
            raise DimensionMismatchError(f"need 1 <= d <= p, got d={self.d}, p={self.p}")

    def value(self, S: Subspace | NDArray[np.float64]) -> float:
        B = S.basis if isinstance(S, Subspace) else S
        return float(self.objective(B))


class OptimOptions(BaseModel):
    """Stopping rule and step policy for ``optimize``."""

    max_iters: int = Field(500, gt=0, description="Maximum number of accepted steps")
    grad_tol: float = Field(
        1e-8, gt=0, description="Stop when the projected-gradient norm is below grad_tol"
    )
    initial_step: float = Field(1.0, gt=0, description="First trial step of each backtracking search")
    max_halvings: int = Field(60, gt=0, description="Backtracking halvings before giving up")
    fd_step: float = Field(1e-6, gt=0, description="Central-difference step when no gradient is given")
    check_invariance: bool = Field(
        True, description="Spot-check span invariance of the objective at the start"
    )


@dataclass
class OptimResult:
    subspace: Subspace
    value: float
    iterations: int
    converged: bool
    history: list[float] = field(default_factory=list)


def project_tangent(B: NDArray[np.float64], G: NDArray[np.float64]) -> NDArray[np.float64]:
    """(I - B B^T) G, the tangent component of G at span(B)."""
    return G - B @ (B.T @ G)


def retract(B: NDArray[np.float64], T: NDArray[np.float64], step: float) -> NDArray[np.float64]:
    """Orthonormalize B + step * T by QR, with a positive diagonal in R."""
    Q, R = sla.qr(B + step * T, mode="economic")
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


def numeric_gradient(
    problem: GrassmannProblem, B: NDArray[np.float64], step: float = 1e-6
) -> NDArray[np.float64]:
    """Entry-wise central differences of the objective at the basis matrix B."""
    B = np.asarray(B, dtype=float)
    grad = np.zeros_like(B)
    for i in range(B.shape[0]):
        for j in range(B.shape[1]):
            E = np.zeros_like(B)
            E[i, j] = step
            grad[i, j] = (problem.objective(B + E) - problem.objective(B - E)) / (2.0 * step)
    return grad


def _gradient(problem: GrassmannProblem, B: NDArray[np.float64], opts: OptimOptions):
    if problem.gradient is not None:
        return np.asarray(problem.gradient(B), dtype=float)
    return numeric_gradient(problem, B, opts.fd_step)


def check_span_invariance(problem: GrassmannProblem, B: NDArray[np.float64], value: float) -> None:
    """Raise FitError unless objective(B O) == objective(B) for a random orthogonal O."""
    rng = np.random.default_rng(problem.p * 1000 + problem.d)
    O, _ = np.linalg.qr(rng.standard_normal((problem.d, problem.d)))
    rotated = problem.value(B @ O)
    if abs(rotated - value) > INVARIANCE_RTOL * max(1.0, abs(value)):
        raise FitError(
            f"{problem.name} is not span invariant: {value!r} at B but {rotated!r} at B O"
        )


def _roundoff_step(
    problem: GrassmannProblem,
    B: NDArray[np.float64],
    T: NDArray[np.float64],
    f: float,
    gnorm: float,
    opts: OptimOptions,
) -> tuple[NDArray[np.float64], float, float] | None:
    """Backtrack on the projected-gradient norm once value differences are roundoff.

    A trial point is taken when its value is within ROUNDOFF_RTOL of ``f`` and its
    projected gradient is at most GRADIENT_DECREASE times the current one.
    """
    noise = ROUNDOFF_RTOL * max(1.0, abs(f))
    step = opts.initial_step
    for _ in range(opts.max_halvings):
        candidate = retract(B, T, step)
        f_new = problem.value(candidate)
        if np.isfinite(f_new) and f_new >= f - noise:
            T_new = project_tangent(candidate, _gradient(problem, candidate, opts))
            if float(np.linalg.norm(T_new)) <= GRADIENT_DECREASE * gnorm:
                return candidate, f_new, step
        step /= 2.0
    return None


def optimize(
    problem: GrassmannProblem, start: Subspace, opts: OptimOptions | None = None
) -> OptimResult:
    """Ascend ``problem.objective`` from ``start``.

    Every accepted step is an Armijo ascent step, so the objective history is
    nondecreasing up to roundoff in the objective itself. When the Armijo test
    can no longer resolve an increase, steps are accepted on a decrease of the
    projected gradient instead. A non-finite objective or gradient ends the run
    at the last good iterate with ``converged=False``.
    """
    opts = opts or OptimOptions()
    if (start.p, start.d) != (problem.p, problem.d):
        raise DimensionMismatchError(
            f"start is {start.p}x{start.d} but the problem is {problem.p}x{problem.d}"
        )
    B = start.basis.copy()
    f = problem.value(B)
    if not np.isfinite(f):
        raise FitError(f"{problem.name} is not finite at the starting subspace")
    if opts.check_invariance:
        check_span_invariance(problem, B, f)

    history = [f]
    converged = False
    iterations = 0
    while iterations < opts.max_iters:
        T = project_tangent(B, _gradient(problem, B, opts))
        gnorm = float(np.linalg.norm(T))
        if not np.isfinite(gnorm):
            logger.warning(f"{problem.name}: non-finite gradient after {iterations} iterations")
            break
        if gnorm < opts.grad_tol:
            converged = True
            break

        step = opts.initial_step
        accepted = False
        for _ in range(opts.max_halvings):
            candidate = retract(B, T, step)
            f_new = problem.value(candidate)
            if not np.isfinite(f_new):
                logger.warning(
                    f"{problem.name}: non-finite value in line search at iteration "
                    f"{iterations + 1}; returning last good iterate"
                )
                return OptimResult(Subspace(B), f, iterations, False, history)
            if f_new >= f + ARMIJO_C * step * gnorm**2:
                accepted = True
                break
            step /= 2.0
        if not accepted:
            fallback = _roundoff_step(problem, B, T, f, gnorm, opts)
            if fallback is None:
                logger.debug(f"{problem.name}: line search stalled at |grad|={gnorm:.3e}")
                break
            candidate, f_new, step = fallback

        B, f = candidate, f_new
        history.append(f)
        iterations += 1
        logger.debug(
            f"{problem.name}: iter {iterations} f={f:.10g} |grad|={gnorm:.3e} step={step:.3e}"
        )

    if not converged:
        logger.debug(f"{problem.name}: stopped after {iterations} iterations without converging")
    return OptimResult(Subspace(B), f, iterations, converged, history)
