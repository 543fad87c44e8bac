from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List

import numpy as np

from app.schemas.kpoint import HIGH_SYMMETRY_POINTS, KPath, WaveVector
from app.schemas.material import OipSet
from app.services.bulk_hamiltonian import band_energies

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PathSample:
    index: int
    k_frac: float
    k: WaveVector


def sample_path(path: KPath) -> List[PathSample]:
    """
    Points along the path. Each segment holds ``samples_per_segment`` points
    including both ends; a corner shared by two segments appears once.
    ``k_frac`` runs from 0 to 1 by cumulative Cartesian length.
    """
    corners = [np.array(HIGH_SYMMETRY_POINTS[label]) for label in path.labels]
    n = path.samples_per_segment
    points: List[np.ndarray] = [corners[0]]
    for start, end in zip(corners[:-1], corners[1:]):
        for t in np.linspace(0.0, 1.0, n)[1:]:
            points.append(start + t * (end - start))

    steps = [0.0] + [float(np.linalg.norm(b - a)) for a, b in zip(points[:-1], points[1:])]
    cumulative = np.cumsum(steps)
    total = float(cumulative[-1])
    fractions = cumulative / total if total > 0 else np.zeros_like(cumulative)
    return [
        PathSample(index=i, k_frac=float(frac), k=WaveVector(kx=p[0], ky=p[1], kz=p[2]))
        for i, (frac, p) in enumerate(zip(fractions, points))
    ]


def band_structure(oips: OipSet, lattice_constant: float, path: KPath) -> list[tuple[PathSample, np.ndarray]]:
    samples = sample_path(path)
    logger.debug("band structure along %s: %d points", "-".join(path.labels), len(samples))
    return [(sample, band_energies(oips, sample.k, lattice_constant)) for sample in samples]


__all__ = ["PathSample", "sample_path", "band_structure"]
