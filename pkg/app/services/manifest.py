from __future__ import annotations

import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

from app import __version__
from app.core.cache_utils import digest_file, digest_payload
from app.core.json_io import write_json
from app.schemas.manifest import RunManifest

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


def _digests(paths: Iterable[Path]) -> dict[str, str]:
    return {str(p): digest_file(p) for p in sorted({Path(p) for p in paths}, key=str) if Path(p).is_file()}


def build_manifest(
    command: str,
    argv: Sequence[str],
    *,
    inputs: Iterable[Path] = (),
    outputs: Iterable[Path] = (),
    config: Any = None,
    seed: Optional[int] = None,
) -> RunManifest:
    return RunManifest(
        command=command,
        argv=list(argv),
        version=__version__,
        seed=seed,
        timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        inputs=_digests(inputs),
        config_digest=None if config is None else digest_payload(config),
        outputs=_digests(outputs),
    )


def write_manifest(out_dir: Path, manifest: RunManifest) -> Path:
    path = write_json(Path(out_dir) / MANIFEST_NAME, manifest)
    logger.info("wrote %s (%d outputs)", path, len(manifest.outputs))
    return path


__all__ = ["MANIFEST_NAME", "build_manifest", "write_manifest"]
