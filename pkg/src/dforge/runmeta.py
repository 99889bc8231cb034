"""Artifact headers, run manifests, and JSONL I/O helpers.

Every emitted artifact starts with a self-describing JSON header line of the
form ``{"_header": {...}}`` carrying tool version, a hash of the effective
config, and the seed. Manifests record input/output content hashes. Neither
contains timestamps or absolute paths, so reruns with identical inputs are
byte-identical wherever they run.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path
from typing import Any, Iterable, Iterator

from . import TOOL_NAME, __version__
from .errors import DataError, MissingArtifactError

HEADER_KEY = "_header"


def file_sha256(path: str | os.PathLike[str]) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def config_hash(config: dict[str, Any]) -> str:
    blob = json.dumps(config, sort_keys=True, ensure_ascii=False).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:12]


def make_header(stage: str, config: dict[str, Any], seed: int | None = None) -> dict[str, Any]:
    return {
        "tool": TOOL_NAME,
        "version": __version__,
        "stage": stage,
        "config": config,
        "config_hash": config_hash(config),
        "seed": seed,
    }


def require_file(path: str | os.PathLike[str], what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise MissingArtifactError(f"{what} not found: {p}")
    return p


def dumps(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False)


def write_jsonl(path: str | os.PathLike[str], rows: Iterable[dict[str, Any]],
                header: dict[str, Any] | None = None) -> int:
    """Write rows as JSONL, header line first. Returns the row count.

    Writes to a temp file and renames, so readers never observe a partial file.
    """
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    tmp = p.with_name(p.name + ".tmp")
    n = 0
    with open(tmp, "w", encoding="utf-8") as f:
        if header is not None:
            f.write(dumps({HEADER_KEY: header}) + "\n")
        for row in rows:
            f.write(dumps(row) + "\n")
            n += 1
    os.replace(tmp, p)
    return n


def read_jsonl(path: str | os.PathLike[str], what: str = "file") -> Iterator[tuple[int, dict[str, Any]]]:
    """Yield (line_number, record) pairs, skipping a leading header line."""
    p = require_file(path, what)
    with open(p, "r", encoding="utf-8") as f:
        for i, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise DataError(f"{p}: line {i}: invalid JSON: {e.msg}") from e
            if not isinstance(obj, dict):
                raise DataError(f"{p}: line {i}: expected a JSON object")
            if i == 1 and HEADER_KEY in obj:
                continue
            yield i, obj


def read_jsonl_header(path: str | os.PathLike[str]) -> dict[str, Any] | None:
    p = require_file(path, "file")
    with open(p, "r", encoding="utf-8") as f:
        first = f.readline().strip()
    if not first:
        return None
    try:
        obj = json.loads(first)
    except json.JSONDecodeError:
        return None
    if isinstance(obj, dict) and HEADER_KEY in obj:
        return obj[HEADER_KEY]
    return None


def write_json(path: str | os.PathLike[str], obj: dict[str, Any]) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    tmp = p.with_name(p.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as f:
        json.dump(obj, f, ensure_ascii=False, indent=2, sort_keys=True)
        f.write("\n")
    os.replace(tmp, p)


def write_manifest(out_path: str | os.PathLike[str], stage: str, config: dict[str, Any],
                   inputs: dict[str, str | os.PathLike[str]],
                   outputs: dict[str, str | os.PathLike[str]],
                   counts: dict[str, Any], seed: int | None = None) -> Path:
    """Write the run manifest next to the stage's main output.

    Paths are reduced to basenames: the manifest describes content, not
    location, so determinism checks can compare manifests across directories.
    """
    manifest = {
        "tool": TOOL_NAME,
        "version": __version__,
        "stage": stage,
        "config": config,
        "config_hash": config_hash(config),
        "seed": seed,
        "inputs": {
            name: {"file": Path(p).name, "sha256": file_sha256(p)}
            for name, p in sorted(inputs.items())
        },
        "outputs": {
            name: {"file": Path(p).name, "sha256": file_sha256(p)}
            for name, p in sorted(outputs.items())
        },
        "counts": counts,
    }
    mpath = Path(str(out_path) + ".manifest.json")
    write_json(mpath, manifest)
    return mpath
