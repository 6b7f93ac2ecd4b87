"""Run manifest: config echo, seed, and checksums of every emitted file."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path


def file_checksum(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(
    output_dir: Path,
    command: str,
    config: dict,
    seed: int,
    files: list[Path],
    duration: float,
    version: str,
) -> Path:
    payload = {
        "command": command,
        "config": config,
        "master_seed": seed,
        "version": version,
        "files": {
            f.name: {"sha256": file_checksum(f), "bytes": f.stat().st_size} for f in files
        },
        "duration_seconds": duration,
    }
    path = output_dir / "manifest.json"
    path.write_text(json.dumps(payload, indent=2) + "\n")
    return path
