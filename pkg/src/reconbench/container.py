"""Binary container for projection and reconstruction matrices.

Layout (all integers little-endian)::

    magic      4 bytes  b"RBMX"
    version    u32      1
    meta_len   u32      length of the UTF-8 JSON metadata (sorted keys)
    meta       bytes
    n_arrays   u32
    per array:
        name_len u16, name (UTF-8)
        rows u64, cols u64
        data     rows*cols float64, row-major

Identical inputs always produce identical bytes.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .attack import AttackKind, ReconstructionMatrix
from .errors import DataError
from .reduction import Method, ProjectionMatrix, ProjectionSpec, VarianceMode

MAGIC = b"RBMX"
VERSION = 1


def dumps(meta: dict, arrays: dict[str, np.ndarray]) -> bytes:
    meta_bytes = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode("utf-8")
    parts = [MAGIC, struct.pack("<II", VERSION, len(meta_bytes)), meta_bytes, struct.pack("<I", len(arrays))]
    for name, arr in arrays.items():
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[None, :]
        nb = name.encode("utf-8")
        parts.append(struct.pack("<H", len(nb)) + nb)
        parts.append(struct.pack("<QQ", *arr.shape))
        parts.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    return b"".join(parts)


def loads(buf: bytes) -> tuple[dict, dict[str, np.ndarray]]:
    if buf[:4] != MAGIC:
        raise DataError("not a matrix container (bad magic)")
    try:
        version, meta_len = struct.unpack_from("<II", buf, 4)
        if version != VERSION:
            raise DataError(f"unsupported container version {version}")
        off = 12
        meta = json.loads(buf[off : off + meta_len].decode("utf-8"))
        off += meta_len
        (n_arrays,) = struct.unpack_from("<I", buf, off)
        off += 4
        arrays = {}
        for _ in range(n_arrays):
            (name_len,) = struct.unpack_from("<H", buf, off)
            off += 2
            name = buf[off : off + name_len].decode("utf-8")
            off += name_len
            rows, cols = struct.unpack_from("<QQ", buf, off)
            off += 16
            data = np.frombuffer(buf, dtype="<f8", count=rows * cols, offset=off)
            arrays[name] = data.reshape(rows, cols).astype(np.float64)
            off += 8 * rows * cols
    except (struct.error, ValueError) as exc:
        raise DataError(f"corrupt matrix container: {exc}") from exc
    return meta, arrays


def save(path, meta: dict, arrays: dict[str, np.ndarray]) -> None:
    Path(path).write_bytes(dumps(meta, arrays))


def load(path) -> tuple[dict, dict[str, np.ndarray]]:
    return loads(Path(path).read_bytes())


def projection_to_bytes(pm: ProjectionMatrix) -> bytes:
    s = pm.spec
    meta = {
        "type": "projection",
        "method": s.method.value,
        "d": s.d,
        "k": s.k,
        "seed": s.seed,
        "center": s.center,
        "rp_variance_mode": s.rp_variance_mode.value,
    }
    arrays = {"p": pm.p}
    if pm.phi is not None:
        arrays["phi"] = pm.phi.astype(np.float64)
    if pm.mean is not None:
        arrays["mean"] = pm.mean
    return dumps(meta, arrays)


def projection_from_bytes(buf: bytes) -> ProjectionMatrix:
    meta, arrays = loads(buf)
    if meta.get("type") != "projection":
        raise DataError("container does not hold a projection matrix")
    spec = ProjectionSpec(
        method=Method(meta["method"]),
        d=meta["d"],
        k=meta["k"],
        seed=meta["seed"],
        center=meta["center"],
        rp_variance_mode=VarianceMode(meta["rp_variance_mode"]),
    )
    phi = arrays["phi"][0].astype(np.int64) if "phi" in arrays else None
    mean = arrays["mean"][0] if "mean" in arrays else None
    return ProjectionMatrix(spec=spec, p=arrays["p"], mean=mean, phi=phi)


def reconstruction_to_bytes(rm: ReconstructionMatrix) -> bytes:
    meta = {
        "type": "reconstruction",
        "kind": rm.kind.value,
        "attacker_dataset_id": rm.attacker_dataset_id,
        "rows_used": rm.rows_used,
    }
    arrays = {"q": rm.q}
    if rm.mean is not None:
        arrays["mean"] = rm.mean
    if rm.bias is not None:
        arrays["bias"] = rm.bias
    return dumps(meta, arrays)


def reconstruction_from_bytes(buf: bytes) -> ReconstructionMatrix:
    meta, arrays = loads(buf)
    if meta.get("type") != "reconstruction":
        raise DataError("container does not hold a reconstruction matrix")
    return ReconstructionMatrix(
        q=arrays["q"],
        kind=AttackKind(meta["kind"]),
        attacker_dataset_id=meta["attacker_dataset_id"],
        mean=arrays["mean"][0] if "mean" in arrays else None,
        bias=arrays["bias"][0] if "bias" in arrays else None,
        rows_used=meta["rows_used"],
    )
