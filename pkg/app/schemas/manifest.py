from __future__ import annotations

from typing import Dict, List, Optional

from pydantic import BaseModel, Field


class RunManifest(BaseModel):
    """Provenance of one CLI run: what went in, what came out."""

    command: str
    argv: List[str]
    version: str
    seed: Optional[int] = None
    timestamp: str
    # path -> sha256 digest
    inputs: Dict[str, str] = Field(default_factory=dict)
    config_digest: Optional[str] = None
    outputs: Dict[str, str] = Field(default_factory=dict)


__all__ = ["RunManifest"]
