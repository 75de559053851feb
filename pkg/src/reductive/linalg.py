"""Dense symmetric linear algebra and subspace geometry.

Every estimator in the package reduces to eigen-analysis of small symmetric
matrices (p is desk scale, at most a few hundred) and to comparisons of
subspaces that are identified only up to a change of basis. Spans, not
individual eigenvectors, are the contract whenever eigenvalues repeat.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg as sla

from reductive.errors import DimensionMismatchError, NotSymmetricError, RankDeficiencyError

logger = logging.getLogger(__name__)

SYMMETRY_RTOL = 1e-10
SPD_RTOL = 1e-12
ORTHONORMAL_ATOL = 1e-10
SPAN_TOL_DEG = 1e-6

_ALLOWED_EXPONENTS = (-1.0, -0.5, 0.5)


@dataclass(frozen=True)
class SymEig:
    """Full eigendecomposition of a symmetric matrix, eigenvalues descending."""

    eigenvalues: NDArray[np.float64]
    eigenvectors: NDArray[np.float64]

    @property
    def p(self) -> int:
        return int(self.eigenvalues.shape[0])

    def top(self, d: int) -> NDArray[np.float64]:
        """Eigenvectors paired with the ``d`` largest eigenvalues."""
        return self.eigenvectors[:, :d]

    def bottom(self, k: int) -> NDArray[np.float64]:
        return self.eigenvectors[:, self.p - k :]

    def reconstruct(self) -> NDArray[np.float64]:
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.T


def _as_square(A: ArrayLike, name: str = "matrix") -> NDArray[np.float64]:
    M = np.asarray(A, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatchError(f"{name} must be square, got shape {M.shape}")
    return M


def symmetrize(A: ArrayLike) -> NDArray[np.float64]:
    M = np.asarray(A, dtype=float)
    return (M + M.T) / 2.0


def check_symmetric(A: ArrayLike, name: str = "matrix") -> NDArray[np.float64]:
    """Validate symmetry to a relative tolerance and return the exactly symmetric part."""
    M = _as_square(A, name)
    if M.size == 0:
        return M
    scale = float(np.max(np.abs(M)))
    asym = float(np.max(np.abs(M - M.T)))
    if asym > SYMMETRY_RTOL * max(scale, np.finfo(float).tiny):
        raise NotSymmetricError(
            f"{name} is not symmetric: max |A - A^T| = {asym:.3e} relative to scale {scale:.3e}"
        )
    return symmetrize(M)


def sym_eig(A: ArrayLike) -> SymEig:
    """Eigendecomposition of a symmetric matrix.

    Eigenvalues are returned in descending order. Each eigenvector is signed so
    that its largest-magnitude entry is positive, which makes the output
    deterministic for a given input on a given platform.
    """
    S = check_symmetric(A)
    w, V = sla.eigh(S)
    order = np.argsort(-w, kind="stable")
    w = w[order]
    V = V[:, order]
    if V.size:
        pivots = np.argmax(np.abs(V), axis=0)
        signs = np.sign(V[pivots, np.arange(V.shape[1])])
        signs[signs == 0] = 1.0
        V = V * signs
    return SymEig(eigenvalues=w, eigenvectors=V)


def _require_spd(eig: SymEig, name: str) -> None:
    if eig.p == 0:
        return
    lam_max = float(eig.eigenvalues[0])
    lam_min = float(eig.eigenvalues[-1])
    if lam_max <= 0.0 or lam_min <= eig.p * SPD_RTOL * lam_max:
        raise RankDeficiencyError(
            f"{name} is not positive definite: smallest eigenvalue {lam_min:.3e}, "
            f"largest {lam_max:.3e}",
            eigenvalue=lam_min,
        )


def is_spd(A: ArrayLike) -> bool:
    try:
        _require_spd(sym_eig(A), "matrix")
    except RankDeficiencyError:
        return False
    return True


def spd_power(A: ArrayLike, exponent: float) -> NDArray[np.float64]:
    """Return ``A**exponent`` for SPD ``A`` and exponent in {-1, -1/2, 1/2}."""
    if exponent not in _ALLOWED_EXPONENTS:
        raise ValueError(f"exponent must be one of {_ALLOWED_EXPONENTS}, got {exponent}")
    eig = sym_eig(A)
    _require_spd(eig, "matrix")
    V = eig.eigenvectors
    return symmetrize((V * eig.eigenvalues**exponent) @ V.T)


def logdet(A: ArrayLike) -> float:
    """Log-determinant of an SPD matrix as the sum of log eigenvalues."""
    eig = sym_eig(A)
    _require_spd(eig, "matrix")
    return float(np.sum(np.log(eig.eigenvalues)))


@dataclass(frozen=True, eq=False)
class Subspace:
    """A point on the Grassmann manifold, carried by an orthonormal p x d basis.

    Two instances compare equal when their spans coincide, whatever bases
    represent them.
    """

    basis: NDArray[np.float64]

    def __post_init__(self) -> None:
        B = np.array(self.basis, dtype=float)
        if B.ndim == 1:
            B = B.reshape(-1, 1)
        if B.ndim != 2:
            raise DimensionMismatchError(f"basis must be 2-D, got shape {B.shape}")
        p, d = B.shape
        if not 1 <= d <= p:
            raise DimensionMismatchError(f"subspace dimension must satisfy 1 <= d <= p, got {d=}, {p=}")
        err = float(np.max(np.abs(B.T @ B - np.eye(d))))
        if err > ORTHONORMAL_ATOL:
            raise ValueError(f"basis columns are not orthonormal (max deviation {err:.2e})")
        B.setflags(write=False)
        object.__setattr__(self, "basis", B)

    @classmethod
    def from_matrix(cls, M: ArrayLike, rank_rtol: float = 1e-10) -> Subspace:
        """Orthonormalize the columns of ``M`` (QR) and return their span."""
        A = np.asarray(M, dtype=float)
        if A.ndim == 1:
            A = A.reshape(-1, 1)
        Q, R = sla.qr(A, mode="economic")
        diag = np.abs(np.diag(R))
        if diag.size == 0 or diag.max() == 0.0 or diag.min() <= rank_rtol * diag.max():
            smallest = float(diag.min()) if diag.size else 0.0
            raise RankDeficiencyError(
                f"columns do not span a {A.shape[1]}-dimensional subspace", eigenvalue=smallest
            )
        signs = np.sign(np.diag(R))
        signs[signs == 0] = 1.0
        return cls(Q * signs)

    @property
    def p(self) -> int:
        return int(self.basis.shape[0])

    @property
    def d(self) -> int:
        return int(self.basis.shape[1])

    def projection(self) -> NDArray[np.float64]:
        return self.basis @ self.basis.T

    def angle_to(self, other: Subspace) -> float:
        return subspace_angle(self, other)

    def same_span(self, other: Subspace, tol_deg: float = SPAN_TOL_DEG) -> bool:
        if (self.p, self.d) != (other.p, other.d):
            return False
        return subspace_angle(self, other) < tol_deg

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.same_span(other)

    def __repr__(self) -> str:
        return f"Subspace(p={self.p}, d={self.d})"


def orthonormal_completion(S: Subspace) -> Subspace:
    """Orthonormal basis of the orthogonal complement of ``S``.

    Built from a QR factorization of ``[S | I_p]`` without pivoting, keeping the
    trailing ``p - d`` columns, so the result is fixed for a fixed basis.
    """
    if S.d == S.p:
        raise DimensionMismatchError(f"a {S.d}-dimensional subspace of R^{S.p} has no completion")
    Q, _ = sla.qr(np.hstack([S.basis, np.eye(S.p)]))
    return Subspace(Q[:, S.d : S.p])


def subspace_angle(S1: Subspace, S2: Subspace) -> float:
    """Largest principal angle between two subspaces, in degrees."""
    if S1.p != S2.p:
        raise DimensionMismatchError(f"ambient dimensions differ: {S1.p} vs {S2.p}")
    if S1.d != S2.d:
        raise DimensionMismatchError(f"subspace dimensions differ: {S1.d} vs {S2.d}")
    angles = sla.subspace_angles(S1.basis, S2.basis)
    return float(np.degrees(np.max(angles)))


def random_subspace(p: int, d: int, rng: np.random.Generator) -> Subspace:
    return Subspace.from_matrix(rng.standard_normal((p, d)))


def random_orthogonal(d: int, rng: np.random.Generator) -> NDArray[np.float64]:
    return random_subspace(d, d, rng).basis.copy()
