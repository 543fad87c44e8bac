import json

import pytest

from app.core.cache_utils import LRUCache, digest_file, digest_payload
from app.core.config import DEFAULT_MATERIALS_DIR
from app.core.errors import MaterialNotFoundError, ParameterError
from app.schemas.material import OIP_FIELDS, OipSet, validate_oips
from app.services.materials import MaterialDatabase, dump_material, load_material


def test_default_database_holds_both_compounds(database):
    assert sorted(database.names) == ["AlAs", "GaAs"]
    gaas = database.get("GaAs")
    assert gaas.lattice_constant == pytest.approx(5.6533)
    assert gaas.oips.e_sa == pytest.approx(-4.7642)
    assert database.get("AlAs").oips.delta_c == pytest.approx(0.024)


def test_shipped_material_files_match_builtin_values(database):
    shipped = MaterialDatabase.from_directory(DEFAULT_MATERIALS_DIR)
    for name in ("GaAs", "AlAs"):
        assert shipped.get(name).oips == database.get(name).oips
        assert shipped.get(name).lattice_constant == database.get(name).lattice_constant


def test_unknown_material_names_the_known_ones(database):
    with pytest.raises(MaterialNotFoundError, match="InP"):
        database.get("InP")
    with pytest.raises(LookupError):
        database.get("InP")


def test_dumped_material_loads_back(tmp_path, gaas):
    path = dump_material(gaas, tmp_path / "GaAs.json")

    payload = json.loads(path.read_text(encoding="utf-8"))
    assert "lattice_constant_angstrom" in payload
    assert load_material(path) == gaas


def test_material_file_with_unknown_key_is_rejected(tmp_path, gaas):
    payload = gaas.to_file_payload()
    payload["oips"]["e_bogus"] = 1.0
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(payload), encoding="utf-8")

    with pytest.raises(ParameterError, match="e_bogus"):
        load_material(path)


def test_material_file_must_be_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")

    with pytest.raises(ParameterError):
        load_material(path)


def test_empty_directory_is_a_parameter_error(tmp_path):
    with pytest.raises(ParameterError):
        MaterialDatabase.from_directory(tmp_path)


def test_with_oips_replaces_only_named_materials(database, gaas):
    shifted = gaas.oips.replace(e_sa=-5.0)
    updated = database.with_oips({"GaAs": shifted})

    assert updated.get("GaAs").oips.e_sa == -5.0
    assert updated.get("AlAs") == database.get("AlAs")
    assert database.get("GaAs").oips.e_sa == pytest.approx(-4.7642)


def test_validate_oips_reports_every_violation(gaas):
    data = gaas.oips.as_dict()
    data["delta_a"] = -0.1
    data["e_sa"] = float("nan")
    report = validate_oips(OipSet(**data))

    assert not report.ok
    assert len(report.violations) == 2
    assert set(gaas.oips.as_dict()) == set(OIP_FIELDS)


def test_digest_payload_ignores_key_order(tmp_path):
    assert digest_payload({"a": 1, "b": [1, 2]}) == digest_payload({"b": [1, 2], "a": 1})
    path = tmp_path / "x.txt"
    path.write_bytes(b"abc")
    assert digest_file(path).startswith("sha256:")


def test_lru_cache_evicts_oldest():
    cache = LRUCache(maxsize=2)
    cache.set("a", 1)
    cache.set("b", 2)
    cache.get("a")
    cache.set("c", 3)

    assert cache.get("b") is None
    assert cache.get("a") == 1
    assert cache.get_or_set("d", lambda: 4) == 4
    assert len(cache) == 2
