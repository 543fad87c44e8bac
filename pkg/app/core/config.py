from __future__ import annotations

from pathlib import Path

from pydantic import AliasChoices, Field
from pydantic_settings import BaseSettings, SettingsConfigDict

PACKAGE_DIR = Path(__file__).resolve().parents[1]
DATA_DIR = PACKAGE_DIR / "data"
DEFAULT_MATERIALS_DIR = DATA_DIR / "materials"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s %(message)s"


class Settings(BaseSettings):
    materials_dir: str | None = Field(default=None, validation_alias=AliasChoices("OIPTB_MATERIALS_DIR"))
    log_level: str = Field(default="INFO", validation_alias=AliasChoices("OIPTB_LOG_LEVEL"))
    threads: int = Field(default=1, ge=1, validation_alias=AliasChoices("OIPTB_THREADS"))
    # Sample geometries for the quantum-well acceptance check; not shipped.
    qw_samples_path: str | None = Field(default=None, validation_alias=AliasChoices("OIPTB_QW_SAMPLES"))
    run_regression: bool = Field(default=False, validation_alias=AliasChoices("OIPTB_RUN_REGRESSION"))

    model_config = SettingsConfigDict(env_file=".env", extra="ignore")


def resolve_materials_dir(settings: "Settings") -> Path:
    """
    Directory holding the default material files: the env override when set,
    otherwise the packaged default materials.
    """
    if settings.materials_dir:
        return Path(settings.materials_dir).expanduser()
    return DEFAULT_MATERIALS_DIR


settings = Settings()
