from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from app.core.cache_utils import LRUCache
from app.core.errors import DomainError, MaterialNotFoundError
from app.models.matrix import HermitianMatrix
from app.schemas.kpoint import KLike, WaveVector, coerce_k
from app.schemas.material import Material
from app.schemas.reports import GapReport
from app.schemas.structure import LayerStack, SlOptions
from app.services.band_properties import gap_report
from app.services.bulk_hamiltonian import bond_matrix, onsite_block
from app.services.eigen import eigvalsh
from app.services.materials import MaterialDatabase

logger = logging.getLogger(__name__)

ORBITALS = 5
# 2·C12/C11 used when a material file carries no elastic ratio
DEFAULT_ELASTIC_RATIO = 0.9
DEFAULT_AXIAL_SAMPLES = 32

_UP_IN_PLANE = ((1.0, 1.0), (-1.0, -1.0))
_DOWN_IN_PLANE = ((1.0, -1.0), (-1.0, 1.0))

_GEOMETRY_CACHE = LRUCache(maxsize=128)


@dataclass(frozen=True, eq=False)
class Bond:
    """One anion->cation bond of the period."""

    vector: np.ndarray
    beta: float
    material: str

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.vector))

    @property
    def cosines(self) -> np.ndarray:
        return self.vector / self.length


@dataclass(frozen=True, eq=False)
class SLGeometry:
    stack: LayerStack
    in_plane_constant: float
    monolayer_materials: Tuple[str, ...]
    perpendicular_constants: Tuple[float, ...]
    up_bonds: Tuple[Tuple[Bond, Bond], ...]
    down_bonds: Tuple[Tuple[Bond, Bond], ...]

    @property
    def monolayers(self) -> int:
        return len(self.monolayer_materials)

    @property
    def dim(self) -> int:
        return 2 * ORBITALS * self.monolayers

    @property
    def period_length(self) -> float:
        return math.fsum(a_perp / 2.0 for a_perp in self.perpendicular_constants)

    def bonds(self) -> List[Bond]:
        out: List[Bond] = []
        for up, down in zip(self.up_bonds, self.down_bonds):
            out.extend(up)
            out.extend(down)
        return out

    @property
    def betas(self) -> np.ndarray:
        return np.array([bond.beta for bond in self.bonds()])

    def anion_neighbours(self, plane: int) -> Tuple[str, str]:
        """Materials of the cations above and below anion plane ``plane``."""
        return self.monolayer_materials[plane], self.monolayer_materials[plane - 1]


@dataclass(frozen=True, eq=False)
class SLBlocks:
    """Per-monolayer 5x5 blocks of the period Hamiltonian at one k."""

    # on-site blocks carry the p-shell spin-orbit term
    h_aa: Tuple[np.ndarray, ...]
    h_cc: Tuple[np.ndarray, ...]
    # anion j -> cation j, and anion j -> cation j-1 (period-closing phase on j = 0)
    h_ac: Tuple[np.ndarray, ...]
    h_ac_down: Tuple[np.ndarray, ...]

    @property
    def h_ca(self) -> Tuple[np.ndarray, ...]:
        return tuple(block.conj().T for block in self.h_ac)

    def assemble(self) -> HermitianMatrix:
        n = len(self.h_aa)
        h = np.zeros((2 * ORBITALS * n, 2 * ORBITALS * n), dtype=np.complex128)
        for j in range(n):
            a = slice(2 * ORBITALS * j, 2 * ORBITALS * j + ORBITALS)
            c = slice(2 * ORBITALS * j + ORBITALS, 2 * ORBITALS * (j + 1))
            below = (j - 1) % n
            c_below = slice(2 * ORBITALS * below + ORBITALS, 2 * ORBITALS * (below + 1))
            h[a, a] += self.h_aa[j]
            h[c, c] += self.h_cc[j]
            h[a, c] += self.h_ac[j]
            h[c, a] += self.h_ac[j].conj().T
            h[a, c_below] += self.h_ac_down[j]
            h[c_below, a] += self.h_ac_down[j].conj().T
        return HermitianMatrix.from_array(h)


def _in_plane_constant(stack: LayerStack, database: MaterialDatabase, options: SlOptions) -> float:
    if options.substrate is not None:
        return database.get(options.substrate).lattice_constant
    return database.get(stack.layers[0].material).lattice_constant


def _perpendicular_constant(material: Material, a_par: float, options: SlOptions) -> float:
    if not options.strain:
        return a_par
    a0 = material.lattice_constant
    ratio = material.elastic_ratio if material.elastic_ratio is not None else DEFAULT_ELASTIC_RATIO
    return a0 * (1.0 - ratio * (a_par / a0 - 1.0))


def _make_bond(in_plane: Tuple[float, float], a_par: float, dz: float, material: Material, options: SlOptions) -> Bond:
    vector = np.array([in_plane[0] * a_par / 4.0, in_plane[1] * a_par / 4.0, dz])
    vector.setflags(write=False)
    beta = 1.0
    if options.strain:
        ideal = material.lattice_constant * math.sqrt(3.0) / 4.0
        beta = (ideal / float(np.linalg.norm(vector))) ** options.eta
    return Bond(vector=vector, beta=beta, material=material.name)


def _geometry_key(stack: LayerStack, database: MaterialDatabase, options: SlOptions) -> tuple:
    names = set(stack.materials)
    if options.substrate is not None:
        names.add(options.substrate)
    geometry_inputs = tuple(
        sorted((name, database.get(name).lattice_constant, database.get(name).elastic_ratio) for name in names)
    )
    return (stack.key(), options.key(), geometry_inputs)


def build_sl_geometry(
    stack: LayerStack,
    database: Optional[MaterialDatabase] = None,
    options: Optional[SlOptions] = None,
) -> SLGeometry:
    """
    Strained-layer geometry of one period: in-plane constant of the substrate,
    tetragonal a_perp per monolayer, bond vectors and β = (d0/d)^η per bond.
    Cached on the geometric inputs only.
    """
    database = database or MaterialDatabase.defaults()
    options = options or SlOptions()
    key = _geometry_key(stack, database, options)
    return _GEOMETRY_CACHE.get_or_set(key, lambda: _build_geometry(stack, database, options))


def _build_geometry(stack: LayerStack, database: MaterialDatabase, options: SlOptions) -> SLGeometry:
    a_par = _in_plane_constant(stack, database, options)
    names = tuple(stack.monolayer_materials())
    materials = [database.get(name) for name in names]
    a_perp = tuple(_perpendicular_constant(m, a_par, options) for m in materials)
    n = len(names)

    up: List[Tuple[Bond, Bond]] = []
    down: List[Tuple[Bond, Bond]] = []
    for j in range(n):
        above, below = materials[j], materials[(j - 1) % n]
        up.append(
            tuple(_make_bond(d, a_par, a_perp[j] / 4.0, above, options) for d in _UP_IN_PLANE)  # type: ignore[misc]
        )
        down.append(
            tuple(  # type: ignore[misc]
                _make_bond(d, a_par, -a_perp[(j - 1) % n] / 4.0, below, options) for d in _DOWN_IN_PLANE
            )
        )

    return SLGeometry(
        stack=stack,
        in_plane_constant=a_par,
        monolayer_materials=names,
        perpendicular_constants=a_perp,
        up_bonds=tuple(up),
        down_bonds=tuple(down),
    )


def _bond_sum(bonds: Sequence[Bond], database: MaterialDatabase, k_par: np.ndarray) -> np.ndarray:
    block = np.zeros((ORBITALS, ORBITALS), dtype=np.complex128)
    for bond in bonds:
        phase = np.exp(1j * (k_par[0] * bond.vector[0] + k_par[1] * bond.vector[1]))
        block += phase * bond_matrix(database.get(bond.material).oips, bond.cosines, bond.beta)
    return block


def _anion_onsite(geometry: SLGeometry, plane: int, database: MaterialDatabase, options: SlOptions) -> np.ndarray:
    # interface anions take the mean of both compounds
    names = tuple(dict.fromkeys(geometry.anion_neighbours(plane)))
    oips = [database.get(name).oips for name in names]
    weight = 1.0 / len(oips)
    e_s = weight * math.fsum(o.e_sa for o in oips)
    e_p = weight * math.fsum(o.e_pa for o in oips)
    e_ss = weight * math.fsum(o.e_ssa for o in oips)
    delta = weight * math.fsum(o.delta_a for o in oips)
    shift = weight * math.fsum(options.offsets.get(name, 0.0) for name in names)
    return onsite_block(e_s, e_p, e_ss, delta, shift)


def build_sl_blocks(
    geometry: SLGeometry,
    k: KLike,
    database: MaterialDatabase,
    options: Optional[SlOptions] = None,
) -> SLBlocks:
    """
    k = (kx, ky) in units of 2π/a_par plus the axial q in units of π/L; the
    spectrum is periodic in q with period 2.
    """
    options = options or SlOptions()
    wave = coerce_k(k)
    k_par = (2.0 * math.pi / geometry.in_plane_constant) * np.array([wave.kx, wave.ky])
    closing = np.exp(-1j * math.pi * wave.kz)

    h_aa, h_cc, h_ac, h_ac_down = [], [], [], []
    for j, name in enumerate(geometry.monolayer_materials):
        cation = database.get(name).oips
        h_aa.append(_anion_onsite(geometry, j, database, options))
        shift = options.offsets.get(name, 0.0)
        h_cc.append(onsite_block(cation.e_sc, cation.e_pc, cation.e_ssc, cation.delta_c, shift))
        h_ac.append(_bond_sum(geometry.up_bonds[j], database, k_par))
        down = _bond_sum(geometry.down_bonds[j], database, k_par)
        h_ac_down.append(down * closing if j == 0 else down)
    return SLBlocks(
        h_aa=tuple(h_aa),
        h_cc=tuple(h_cc),
        h_ac=tuple(h_ac),
        h_ac_down=tuple(h_ac_down),
    )


def build_sl_hamiltonian(
    stack: LayerStack,
    k: KLike,
    database: Optional[MaterialDatabase] = None,
    options: Optional[SlOptions] = None,
) -> HermitianMatrix:
    database = database or MaterialDatabase.defaults()
    options = options or SlOptions()
    wave = coerce_k(k)
    geometry = build_sl_geometry(stack, database, options)
    return build_sl_blocks(geometry, wave, database, options).assemble()


def sl_band_energies(
    stack: LayerStack,
    k: KLike,
    database: Optional[MaterialDatabase] = None,
    options: Optional[SlOptions] = None,
) -> np.ndarray:
    wave = coerce_k(k)
    h = build_sl_hamiltonian(stack, wave, database, options)
    return eigvalsh(h, k=(wave.kx, wave.ky, wave.kz))


SAMPLING_SETS = ("gamma", "axial", "zone")


def gamma_sample() -> Dict[str, WaveVector]:
    return {"Γ": WaveVector()}


def axial_samples(axial: int = DEFAULT_AXIAL_SAMPLES) -> Dict[str, WaveVector]:
    """Γ̄ plus ``axial`` uniform points over the growth-axis zone (−1, 1]."""
    if axial < 2:
        raise DomainError(f"need at least 2 axial samples, got {axial}")
    samples: Dict[str, WaveVector] = {"Γ": WaveVector()}
    for i in range(1, axial + 1):
        q = -1.0 + 2.0 * i / axial
        if q == 0.0:
            continue
        label = "Z" if q == 1.0 else f"q={q:+.5f}"
        samples[label] = WaveVector(kz=q)
    return samples


def zone_samples(axial: int = DEFAULT_AXIAL_SAMPLES) -> Dict[str, WaveVector]:
    """
    Axial samples plus the in-plane edges X̄ and M̄. The edges pick up the
    folded bulk L and X valleys, so this set reports the lowest conduction
    state anywhere in the zone rather than the Γ̄ gap.
    """
    samples = axial_samples(axial)
    samples["X̄"] = WaveVector(kx=0.5, ky=0.5)
    samples["M̄"] = WaveVector(kx=1.0)
    return samples


def sl_samples(sampling: str = "gamma", axial: int = DEFAULT_AXIAL_SAMPLES) -> Dict[str, WaveVector]:
    if sampling == "gamma":
        return gamma_sample()
    if sampling == "axial":
        return axial_samples(axial)
    if sampling == "zone":
        return zone_samples(axial)
    choices = ", ".join(SAMPLING_SETS)
    raise DomainError(f"unknown k sampling {sampling!r}; expected one of {choices}")


def sl_gap(
    stack: LayerStack,
    k_samples: Optional[Mapping[str, KLike]] = None,
    database: Optional[MaterialDatabase] = None,
    options: Optional[SlOptions] = None,
) -> GapReport:
    """Gap over ``k_samples`` (default: Γ̄ only) with 4 valence bands per monolayer."""
    database = database or MaterialDatabase.defaults()
    options = options or SlOptions()
    samples = gamma_sample() if k_samples is None else k_samples
    if not samples:
        raise DomainError("superlattice gap search needs at least one k sample")
    geometry = build_sl_geometry(stack, database, options)
    energies = {}
    for label, k in samples.items():
        wave = coerce_k(k)
        h = build_sl_blocks(geometry, wave, database, options).assemble()
        energies[label] = eigvalsh(h, k=(wave.kx, wave.ky, wave.kz))
    return gap_report(energies, n_valence=4 * geometry.monolayers)


def require_materials(stack: LayerStack, database: MaterialDatabase) -> None:
    missing = [name for name in stack.materials if name not in database]
    if missing:
        raise MaterialNotFoundError(f"stack {stack.label} uses unknown materials: {', '.join(missing)}")


__all__ = [
    "DEFAULT_ELASTIC_RATIO",
    "DEFAULT_AXIAL_SAMPLES",
    "Bond",
    "SLGeometry",
    "SLBlocks",
    "build_sl_geometry",
    "build_sl_blocks",
    "build_sl_hamiltonian",
    "sl_band_energies",
    "SAMPLING_SETS",
    "gamma_sample",
    "axial_samples",
    "zone_samples",
    "sl_samples",
    "sl_gap",
    "require_materials",
]
