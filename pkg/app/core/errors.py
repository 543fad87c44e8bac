from __future__ import annotations

from typing import Sequence


class TightBindingError(RuntimeError):
    """Base class for every error raised by the band-structure engine."""


class ParameterError(TightBindingError, ValueError):
    """Raised when an OIP set, material file or config is invalid."""


class MaterialNotFoundError(TightBindingError, LookupError):
    """Raised when a material name is not present in the database."""


class DomainError(TightBindingError, ValueError):
    """Raised when an argument lies outside the domain of an operation."""


class ConstraintError(TightBindingError):
    """Raised when a constraint relation cannot be evaluated."""

    def __init__(self, message: str, *, equation: str) -> None:
        super().__init__(f"{equation}: {message}")
        self.equation = equation


class ConstraintDegenerateError(ConstraintError):
    """Raised when a constraint relation has a vanishing denominator."""


class ConstraintInfeasibleError(ConstraintError):
    """Raised when a constraint relation has no real solution."""

    def __init__(self, message: str, *, equation: str, distance: float = 0.0) -> None:
        super().__init__(message, equation=equation)
        self.distance = distance


class EigenSolverError(TightBindingError, ArithmeticError):
    """Raised when the Hermitian eigensolver fails or returns an inaccurate result."""

    def __init__(
        self,
        message: str,
        *,
        dim: int,
        residual: float | None = None,
        k: Sequence[float] | None = None,
    ) -> None:
        detail = f"{message} (dim={dim}"
        if residual is not None:
            detail += f", residual={residual:.3e}"
        if k is not None:
            detail += f", k=({', '.join(f'{c:g}' for c in k)})"
        super().__init__(detail + ")")
        self.dim = dim
        self.residual = residual
        self.k = tuple(k) if k is not None else None


class DegenerateBandError(TightBindingError):
    """Raised when a band curvature is requested at a degenerate level."""

    def __init__(self, band_index: int, indices: Sequence[int]) -> None:
        super().__init__(f"band {band_index} is degenerate with bands {list(indices)} at the expansion point")
        self.band_index = band_index
        self.indices = tuple(indices)


class PopulationPenalizedError(TightBindingError, ArithmeticError):
    """Raised when every genome of the initial population is priced at the penalty."""

    def __init__(self, population_size: int) -> None:
        super().__init__(f"all {population_size} genomes of the initial population are unfit; nothing to evolve")
        self.population_size = population_size


USAGE_ERRORS: tuple[type[BaseException], ...] = (
    ParameterError,
    MaterialNotFoundError,
    DomainError,
    ConstraintError,
)
NUMERICAL_ERRORS: tuple[type[BaseException], ...] = (EigenSolverError, DegenerateBandError, PopulationPenalizedError)

__all__ = [
    "TightBindingError",
    "ParameterError",
    "MaterialNotFoundError",
    "DomainError",
    "ConstraintError",
    "ConstraintDegenerateError",
    "ConstraintInfeasibleError",
    "EigenSolverError",
    "DegenerateBandError",
    "PopulationPenalizedError",
    "USAGE_ERRORS",
    "NUMERICAL_ERRORS",
]
