"""Deterministic, versioned checkpoint container.

Layout: one JSON header line (sorted keys, no timestamps) followed by the raw
little-endian bytes of each array in header order. Writing the same state twice
produces byte-identical files, which the determinism and replay guarantees
depend on; stdlib .npz was rejected because its zip members embed timestamps.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from guardrl.errors import ConfigError

FORMAT_NAME = "guardrl-checkpoint"
FORMAT_VERSION = 1


def save_checkpoint(
    path: str | Path,
    arrays: dict[str, np.ndarray],
    scalars: dict[str, float | int],
    config_hash: str,
    meta: dict | None = None,
) -> None:
    names = sorted(arrays)
    header = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "config_hash": config_hash,
        "meta": meta or {},
        "scalars": {k: scalars[k] for k in sorted(scalars)},
        "arrays": [
            {"name": n, "shape": list(arrays[n].shape), "dtype": str(arrays[n].dtype)} for n in names
        ],
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True, separators=(",", ":")).encode() + b"\n")
        for n in names:
            arr = np.ascontiguousarray(arrays[n])
            if arr.dtype.byteorder == ">":
                arr = arr.astype(arr.dtype.newbyteorder("<"))
            fh.write(arr.tobytes())


def load_checkpoint(path: str | Path) -> tuple[dict[str, np.ndarray], dict, str, dict]:
    with open(path, "rb") as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not a checkpoint file") from exc
        if header.get("format") != FORMAT_NAME:
            raise ConfigError(f"{path}: unexpected format {header.get('format')!r}")
        if header.get("version") != FORMAT_VERSION:
            raise ConfigError(f"{path}: unsupported checkpoint version {header.get('version')!r}")
        arrays: dict[str, np.ndarray] = {}
        for spec in header["arrays"]:
            dtype = np.dtype(spec["dtype"])
            shape = tuple(spec["shape"])
            count = int(np.prod(shape)) if shape else 1
            buf = fh.read(count * dtype.itemsize)
            if len(buf) != count * dtype.itemsize:
                raise ConfigError(f"{path}: truncated array {spec['name']!r}")
            arrays[spec["name"]] = np.frombuffer(buf, dtype=dtype).reshape(shape).copy()
        trailing = fh.read(1)
        if trailing:
            raise ConfigError(f"{path}: trailing bytes after declared arrays")
    return arrays, dict(header["scalars"]), header["config_hash"], header.get("meta", {})
