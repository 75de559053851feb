"""Centered basis matrices F whose rows are the basis functions f_y of the response."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from reductive.errors import DegenerateBasisError, InsufficientDataError
from reductive.models import BasisFamily, BasisKind

logger = logging.getLogger(__name__)

GRAM_CONDITION_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class BasisMatrix:
    """The n x r matrix F with centered columns, plus how it was built."""

    F: NDArray[np.float64]
    kind: BasisKind
    slice_assignments: NDArray[np.int_] | None = None
    warnings: tuple[str, ...] = field(default_factory=tuple)

    @property
    def n(self) -> int:
        return int(self.F.shape[0])

    @property
    def r(self) -> int:
        return int(self.F.shape[1])


def assign_slices(y: ArrayLike, h: int) -> NDArray[np.int_]:
    """Assign each response to one of ``h`` slices (labels 0..h-1) by rank.

    Slices take floor(n/h) or ceil(n/h) sorted responses from left to right;
    a run of equal responses straddling a boundary is pushed whole into the
    lower slice, so replicates always share a slice.
    """
    values = np.asarray(y, dtype=float).ravel()
    n = values.size
    if h < 2:
        raise DegenerateBasisError(f"need at least 2 slices, got {h}")
    order = np.argsort(values, kind="stable")
    ys = values[order]
    base, extra = divmod(n, h)
    labels_sorted = np.empty(n, dtype=int)
    start = 0
    nominal_end = 0
    for k in range(h):
        nominal_end += base + (1 if k < extra else 0)
        if k == h - 1:
            end = n
        else:
            end = min(max(nominal_end, start + 1), n)
            while end < n and ys[end] == ys[end - 1]:
                end += 1
        if end <= start:
            raise DegenerateBasisError(
                f"slice {k + 1} of {h} is empty: the response has too few distinct values"
            )
        labels_sorted[start:end] = k
        start = end
    labels = np.empty(n, dtype=int)
    labels[order] = labels_sorted
    return labels


def _center(G: NDArray[np.float64]) -> NDArray[np.float64]:
    return G - G.mean(axis=0, keepdims=True)


def _slice_columns(labels: NDArray[np.int_], h: int) -> NDArray[np.float64]:
    n = labels.size
    indicators = (labels[:, None] == np.arange(h)[None, :]).astype(float)
    # f_yk = J(y in H_k) - n_k / n, dropping the last slice
    return indicators[:, : h - 1] - indicators[:, : h - 1].sum(axis=0) / n


def build_basis(y: ArrayLike, kind: BasisKind) -> BasisMatrix:
    """Build the centered basis matrix F for the response ``y``."""
    values = np.asarray(y, dtype=float).ravel()
    n = values.size
    r = kind.r
    if n < r + 2:
        raise InsufficientDataError(f"basis {kind} needs n >= {r + 2} observations, got {n}")
    if not np.all(np.isfinite(values)):
        raise DegenerateBasisError("response contains non-finite values")
    spread = float(np.ptp(values))
    warnings: list[str] = []
    labels = None

    if kind.family is BasisFamily.SLICES:
        h = kind.order
        if n < 2 * h:
            raise InsufficientDataError(f"{h} slices need n >= {2 * h} observations, got {n}")
        if spread == 0.0:
            raise DegenerateBasisError("constant response: every observation falls in one slice")
        labels = assign_slices(values, h)
        F = _slice_columns(labels, h)
    elif spread == 0.0:
        raise DegenerateBasisError(f"constant response cannot support the {kind} basis")
    elif kind.family is BasisFamily.LINEAR:
        F = _center(values[:, None])
    elif kind.family is BasisFamily.POLYNOMIAL:
        powers = np.column_stack([values**j for j in range(1, kind.order + 1)])
        F = _center(powers)
        if np.any(np.ptp(F, axis=0) == 0.0):
            raise DegenerateBasisError("a polynomial basis column has zero variance")
        cond = float(np.linalg.cond(F.T @ F))
        if cond > GRAM_CONDITION_LIMIT:
            message = (
                f"polynomial basis of degree {kind.order} is ill-conditioned "
                f"(cond(F^T F) = {cond:.2e}); consider rescaling the response"
            )
            logger.warning(message)
            warnings.append(message)
    else:
        # responses rescaled to [0, 1) before the harmonics are applied
        u = (values - values.min()) / spread * (n / (n + 1.0))
        harmonics = []
        for j in range(1, kind.order + 1):
            harmonics.append(np.cos(2.0 * np.pi * j * u))
            harmonics.append(np.sin(2.0 * np.pi * j * u))
        F = _center(np.column_stack(harmonics))

    logger.debug(f"Built {kind} basis with n={n}, r={F.shape[1]}")
    return BasisMatrix(F=F, kind=kind, slice_assignments=labels, warnings=tuple(warnings))
