"""
Reductive - model-based sufficient dimension reduction.

This top-level package exposes the data containers and result documents;
the estimators live in ``reductive.services``.
"""

from .linalg import Subspace
from .models import (
    BasisKind,
    DimensionSelection,
    DimensionTest,
    ExtendedStrategy,
    FitDocument,
    Method,
)
from .moments import Dataset

__all__ = [
    "BasisKind",
    "Dataset",
    "DimensionSelection",
    "DimensionTest",
    "ExtendedStrategy",
    "FitDocument",
    "Method",
    "Subspace",
]

__version__ = "0.1.0"
