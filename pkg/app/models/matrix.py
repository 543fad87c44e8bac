from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from app.core.constants import HERMITIAN_ATOL
from app.core.errors import ParameterError


@dataclass(frozen=True, eq=False)
class HermitianMatrix:
    """
    Dense complex Hermitian matrix. The stored array is read-only and exactly
    Hermitian: construction rejects inputs off by more than ``atol`` and
    replaces the rest by (A + A^H) / 2, which is Hermitian bit for bit.
    """

    data: np.ndarray

    @classmethod
    def from_array(cls, array: np.ndarray, *, atol: float = HERMITIAN_ATOL) -> "HermitianMatrix":
        arr = np.asarray(array, dtype=np.complex128)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise ParameterError(f"Hermitian matrix must be square and non-empty, got shape {arr.shape}")
        asym = float(np.max(np.abs(arr - arr.conj().T)))
        if not np.isfinite(asym) or asym > atol:
            raise ParameterError(f"matrix violates Hermiticity by {asym:.3e} (atol {atol:.1e})")
        sym = (arr + arr.conj().T) / 2.0
        sym.setflags(write=False)
        return cls(sym)

    @property
    def dim(self) -> int:
        return int(self.data.shape[0])

    def max_asymmetry(self) -> float:
        return float(np.max(np.abs(self.data - self.data.conj().T)))

    def norm_inf(self) -> float:
        return float(np.max(np.sum(np.abs(self.data), axis=1)))

    def __getitem__(self, index: tuple[int, int]) -> complex:
        return complex(self.data[index])


@dataclass(frozen=True, eq=False)
class EigenResult:
    values: np.ndarray
    vectors: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return int(self.values.shape[0])


__all__ = ["HermitianMatrix", "EigenResult"]
