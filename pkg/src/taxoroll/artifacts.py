"""Versioned on-disk model artifacts and run manifests.

Artifacts are pickles of plain containers (dicts, lists, numpy arrays;
never sets, whose iteration order varies across processes), so rerunning
a command with identical inputs produces byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import pickle
from pathlib import Path
from typing import Any

from .errors import DataError

MODEL_FORMAT = "taxoroll-model/1"
_PICKLE_PROTOCOL = 4


def config_hash(config: dict) -> str:
    """Stable sha256 over a JSON-serializable config."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def save_model(path: str | Path, payload: dict[str, Any]) -> None:
    payload = {"format": MODEL_FORMAT, **payload}
    with Path(path).open("wb") as fh:
        pickle.dump(payload, fh, protocol=_PICKLE_PROTOCOL)


def load_model(path: str | Path) -> dict[str, Any]:
    with Path(path).open("rb") as fh:
        payload = pickle.load(fh)
    if not isinstance(payload, dict) or payload.get("format") != MODEL_FORMAT:
        raise DataError(f"{path}: not a {MODEL_FORMAT} artifact")
    return payload


def write_manifest(
    out_dir: str | Path, command: str, config: dict, artifacts: dict[str, str]
) -> Path:
    """Record what a command produced: artifact paths plus a config hash."""
    manifest = {
        "command": command,
        "config": config,
        "config_hash": config_hash(config),
        "artifacts": dict(sorted(artifacts.items())),
    }
    path = Path(out_dir) / f"{command}_manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")
    return path
