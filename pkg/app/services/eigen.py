from __future__ import annotations

import logging
from typing import Sequence

import numpy as np
import scipy.linalg

from app.core.errors import EigenSolverError
from app.models.matrix import EigenResult, HermitianMatrix

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1.0e-9


def eigh(h: HermitianMatrix, want_vectors: bool = False, *, k: Sequence[float] | None = None) -> EigenResult:
    """
    Full spectrum of a Hermitian matrix, ascending. LAPACK (via scipy) does the
    work; with vectors requested the residual of every pair is checked.
    """
    data = h.data
    try:
        if want_vectors:
            values, vectors = scipy.linalg.eigh(data, check_finite=True)
        else:
            values = scipy.linalg.eigvalsh(data, check_finite=True)
            vectors = None
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, ValueError) as exc:
        raise EigenSolverError(f"eigensolver failed: {exc}", dim=h.dim, k=k) from exc

    values = np.asarray(values, dtype=float)
    order = np.argsort(values, kind="stable")
    values = values[order]
    if not np.all(np.isfinite(values)):
        raise EigenSolverError("eigensolver returned non-finite values", dim=h.dim, k=k)

    if vectors is not None:
        vectors = vectors[:, order]
        residual = float(np.max(np.abs(data @ vectors - vectors * values)))
        scale = max(1.0, h.norm_inf())
        if residual > RESIDUAL_TOL * scale:
            raise EigenSolverError("eigenpair residual above tolerance", dim=h.dim, residual=residual, k=k)

    values.setflags(write=False)
    return EigenResult(values=values, vectors=vectors)


def eigvalsh(h: HermitianMatrix, *, k: Sequence[float] | None = None) -> np.ndarray:
    return eigh(h, want_vectors=False, k=k).values


__all__ = ["eigh", "eigvalsh", "RESIDUAL_TOL"]
