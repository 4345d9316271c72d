"""Deterministic checkpoint container.

Layout: magic "PCKP", u32 container version, u32 manifest length, UTF-8 JSON
manifest (sorted keys), then each array's raw float32 little-endian bytes in
manifest order. No timestamps or compression, so identical parameters always
produce identical bytes (zip-based formats do not).
"""

import json
import struct
from dataclasses import dataclass, field

import numpy as np

MAGIC = b"PCKP"
VERSION = 1


@dataclass
class ModelCheckpoint:
    kind: str
    params: dict  # name -> float32 ndarray, insertion-ordered
    hyperparams: dict = field(default_factory=dict)
    seed: int = 0
    version: int = VERSION


def save_checkpoint(path, kind, params, hyperparams=None, seed=0):
    """Write named float32 arrays plus a manifest to `path`."""
    arrays = []
    blobs = []
    for name, values in params.items():
        arr = np.ascontiguousarray(values, dtype=np.float32)
        arrays.append({"name": name, "shape": list(arr.shape)})
        blobs.append(arr.tobytes())
    manifest = {
        "format_version": VERSION,
        "kind": kind,
        "seed": int(seed),
        "hyperparams": hyperparams or {},
        "arrays": arrays,
    }
    payload = json.dumps(manifest, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(payload)))
        fh.write(payload)
        for blob in blobs:
            fh.write(blob)


def load_checkpoint(path):
    """Read a checkpoint; raises ValueError on any malformed content."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != MAGIC:
        raise ValueError(f"{path}: not a checkpoint file (bad magic)")
    if len(data) < 12:
        raise ValueError(f"{path}: truncated header")
    version, manifest_len = struct.unpack("<II", data[4:12])
    if version != VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {version}")
    manifest_end = 12 + manifest_len
    if len(data) < manifest_end:
        raise ValueError(f"{path}: truncated manifest")
    try:
        manifest = json.loads(data[12:manifest_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValueError(f"{path}: corrupted manifest: {exc}") from exc
    for key in ("kind", "arrays", "hyperparams", "seed"):
        if key not in manifest:
            raise ValueError(f"{path}: manifest missing {key!r}")
    params = {}
    offset = manifest_end
    for entry in manifest["arrays"]:
        shape = tuple(int(s) for s in entry["shape"])
        nbytes = int(np.prod(shape, dtype=np.int64)) * 4 if shape else 4
        chunk = data[offset : offset + nbytes]
        if len(chunk) != nbytes:
            raise ValueError(f"{path}: truncated array {entry['name']!r}")
        params[entry["name"]] = np.frombuffer(chunk, dtype="<f4").reshape(shape).copy()
        offset += nbytes
    if offset != len(data):
        raise ValueError(f"{path}: {len(data) - offset} trailing bytes")
    return ModelCheckpoint(
        kind=manifest["kind"],
        params=params,
        hyperparams=manifest["hyperparams"],
        seed=manifest["seed"],
        version=version,
    )


def module_arrays(module):
    """Named float32 numpy views of a torch module's parameters."""
    return {name: p.detach().cpu().numpy().astype(np.float32) for name, p in module.named_parameters()}


def load_module_arrays(module, params):
    """Copy checkpoint arrays back into a freshly built torch module."""
    import torch

    named = dict(module.named_parameters())
    if set(named) != set(params):
        missing = set(named) ^ set(params)
        raise ValueError(f"checkpoint/model parameter mismatch: {sorted(missing)}")
    with torch.no_grad():
        for name, arr in params.items():
            target = named[name]
            if tuple(target.shape) != tuple(arr.shape):
                raise ValueError(
                    f"shape mismatch for {name!r}: model {tuple(target.shape)} vs checkpoint {arr.shape}"
                )
            target.copy_(torch.from_numpy(arr))
