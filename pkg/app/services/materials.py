from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Mapping, Optional

from pydantic import ValidationError

from app.core.config import Settings, resolve_materials_dir, settings as default_settings
from app.core.errors import MaterialNotFoundError, ParameterError
from app.core.json_io import write_json
from app.schemas.material import Material, OipSet

logger = logging.getLogger(__name__)

# 300 K parameter sets; lattice constants in Å.
_DEFAULT_MATERIALS: Dict[str, dict] = {
    "GaAs": {
        "name": "GaAs",
        "lattice_constant_angstrom": 5.6533,
        "anion": "As",
        "cation": "Ga",
        "elastic_ratio": 0.927,
        "oips": {
            "e_sa": -4.7642,
            "e_sc": -6.0354,
            "e_ssa": 9.0528,
            "e_ssc": 5.3134,
            "e_xayc": 5.2952,
            "e_saxc": 1.9014,
            "e_xasc": 11.6705,
            "e_ssaxc": 3.8331,
            "e_xassc": 4.7758,
            "e_pa": 1.5776,
            "e_pc": 3.2967,
            "e_sasc": -6.7941,
            "e_xaxc": 2.4006,
            "delta_a": 0.421,
            "delta_c": 0.174,
        },
    },
    "AlAs": {
        "name": "AlAs",
        "lattice_constant_angstrom": 5.6611,
        "anion": "As",
        "cation": "Al",
        "elastic_ratio": 0.854,
        "oips": {
            "e_sa": -8.1639,
            "e_sc": -0.6369,
            "e_ssa": 14.9740,
            "e_ssc": 7.1118,
            "e_xayc": 4.6210,
            "e_saxc": 7.4231,
            "e_xasc": 6.7832,
            "e_ssaxc": 7.3042,
            "e_xassc": 3.1458,
            "e_pa": 1.4693,
            "e_pc": 3.3875,
            "e_sasc": -6.3951,
            "e_xaxc": 2.3378,
            "delta_a": 0.421,
            "delta_c": 0.024,
        },
    },
}


def material_database_defaults() -> List[Material]:
    """GaAs and AlAs with the tabulated 300 K parameters; fresh objects on every call."""
    return [Material.model_validate(payload) for payload in _DEFAULT_MATERIALS.values()]


def _describe_validation_error(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err.get("loc", ()))
        if err.get("type") == "extra_forbidden":
            parts.append(f"unknown key '{loc}'")
        else:
            parts.append(f"{loc or '<root>'}: {err.get('msg')}")
    return "; ".join(parts)


def parse_material(payload: Mapping) -> Material:
    try:
        return Material.model_validate(payload)
    except ValidationError as exc:
        raise ParameterError(f"invalid material: {_describe_validation_error(exc)}") from exc


def load_material(path: Path) -> Material:
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParameterError(f"cannot read material file {path}: {exc}") from exc
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParameterError(f"material file {path} is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ParameterError(f"material file {path} must hold one JSON object")
    try:
        return parse_material(payload)
    except ParameterError as exc:
        raise ParameterError(f"{path}: {exc}") from exc


def dump_material(material: Material, path: Path) -> Path:
    return write_json(path, material.to_file_payload())


class MaterialDatabase:
    """Name-indexed, immutable-by-convention collection of materials."""

    def __init__(self, materials: Iterable[Material]):
        self._materials: Dict[str, Material] = {}
        for material in materials:
            self._materials[material.name] = material

    @classmethod
    def defaults(cls) -> "MaterialDatabase":
        return cls(material_database_defaults())

    @classmethod
    def from_directory(cls, directory: Path) -> "MaterialDatabase":
        directory = Path(directory)
        if not directory.is_dir():
            raise ParameterError(f"material directory not found: {directory}")
        files = sorted(directory.glob("*.json"))
        if not files:
            raise ParameterError(f"no material files in {directory}")
        materials = [load_material(path) for path in files]
        logger.info("loaded %d materials from %s", len(materials), directory)
        return cls(materials)

    @classmethod
    def from_files(cls, paths: Iterable[Path], base: Optional["MaterialDatabase"] = None) -> "MaterialDatabase":
        loaded = [load_material(path) for path in paths]
        start = list(base) if base is not None else []
        return cls([*start, *loaded])

    def get(self, name: str) -> Material:
        try:
            return self._materials[name]
        except KeyError:
            known = ", ".join(sorted(self._materials)) or "<empty>"
            raise MaterialNotFoundError(f"material '{name}' not found (known: {known})") from None

    def with_material(self, material: Material) -> "MaterialDatabase":
        return MaterialDatabase([*self._materials.values(), material])

    def with_oips(self, oips_by_name: Mapping[str, OipSet]) -> "MaterialDatabase":
        return MaterialDatabase(
            [m.with_oips(oips_by_name[m.name]) if m.name in oips_by_name else m for m in self._materials.values()]
        )

    @property
    def names(self) -> List[str]:
        return list(self._materials)

    def __contains__(self, name: object) -> bool:
        return name in self._materials

    def __iter__(self) -> Iterator[Material]:
        return iter(self._materials.values())

    def __len__(self) -> int:
        return len(self._materials)


def default_database(settings: Settings | None = None) -> MaterialDatabase:
    """Database for CLI commands: the env-configured directory, else built-ins."""
    settings = settings or default_settings
    directory = resolve_materials_dir(settings)
    if settings.materials_dir:
        return MaterialDatabase.from_directory(directory)
    if directory.is_dir() and any(directory.glob("*.json")):
        return MaterialDatabase.from_directory(directory)
    return MaterialDatabase.defaults()


__all__ = [
    "material_database_defaults",
    "parse_material",
    "load_material",
    "dump_material",
    "MaterialDatabase",
    "default_database",
]
