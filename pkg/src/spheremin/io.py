"""File formats for fields, profiles, diagrams, and run manifests.

CSV files carry a header row and IEEE-754 round-trip decimals (17
significant digits), so reading them back reproduces the doubles exactly.

The binary field dump is little-endian:

    bytes 0..3    magic "SMF1"
    bytes 4..7    format version, uint32 (currently 1)
    bytes 8..15   node count n, uint64
    then          n * 3 float64 components, node-major

JSON reports go through plain json.dump with sorted keys; non-finite
floats are emitted as null for portability.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import struct
import sys
from pathlib import Path

import numpy as np

from .mesh import Mesh

_MAGIC = b"SMF1"
_VERSION = 1


def format_float(x: float) -> str:
    """Round-trip decimal form of a double."""
    return "%.17g" % float(x)


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)


def write_field_csv(path, mesh: Mesh, field: np.ndarray) -> None:
    """Node coordinates and components, one row per node."""
    field = np.asarray(field, dtype=float)
    rows = ([format_float(v) for v in (x, y, m[0], m[1], m[2])]
            for (x, y), m in zip(mesh.nodes, field))
    _write_csv(path, ["x", "y", "m1", "m2", "m3"], rows)


def write_phase_csv(path, mesh: Mesh, phase: np.ndarray) -> None:
    phase = np.asarray(phase, dtype=float)
    rows = ([format_float(v) for v in (x, y, p)]
            for (x, y), p in zip(mesh.nodes, phase))
    _write_csv(path, ["x", "y", "phi"], rows)


def write_profile_csv(path, profile) -> None:
    """Radial profile with its derived meridian samples, plottable as-is."""
    phi = profile.u / 2.0
    columns = (profile.r, profile.u, profile.du, phi, np.sin(phi),
               np.cos(phi))
    rows = ([format_float(v) for v in row] for row in zip(*columns))
    _write_csv(path, ["r", "u", "u_prime", "phi", "m1", "m3"], rows)


def write_phase_diagram_csv(path, diagram) -> None:
    """One row per (kappa, gamma) cell, kappa-major order."""
    rows = []
    for i, kappa in enumerate(diagram.kappas):
        for j, gamma in enumerate(diagram.gammas):
            rows.append([format_float(kappa), format_float(gamma),
                         diagram.classes[i, j],
                         format_float(diagram.min_energy[i, j]),
                         format_float(diagram.e3_energy[i, j]),
                         format_float(diagram.inplane_energy[i, j]),
                         format_float(diagram.kappa_gamma[i, j]),
                         format_float(diagram.gamma_kappa[i, j])])
    _write_csv(path, ["kappa", "gamma", "class", "E_min", "E_e3",
                      "E_inplane", "kappa_gamma", "gamma_kappa"], rows)


def write_field_bin(path, field: np.ndarray) -> None:
    field = np.ascontiguousarray(field, dtype="<f8")
    if field.ndim != 2 or field.shape[1] != 3:
        raise ValueError("expected an (n, 3) field")
    with open(path, "wb") as handle:
        handle.write(_MAGIC)
        handle.write(struct.pack("<IQ", _VERSION, field.shape[0]))
        handle.write(field.tobytes())


def read_field_bin(path) -> np.ndarray:
    with open(path, "rb") as handle:
        head = handle.read(16)
        if len(head) != 16 or head[:4] != _MAGIC:
            raise ValueError(f"{path}: not a field dump (bad magic)")
        version, count = struct.unpack("<IQ", head[4:])
        if version != _VERSION:
            raise ValueError(f"{path}: unsupported format version {version}")
        data = handle.read(count * 24)
        if len(data) != count * 24:
            raise ValueError(f"{path}: truncated field dump")
        if handle.read(1):
            raise ValueError(f"{path}: trailing bytes after field dump")
    return np.frombuffer(data, dtype="<f8").reshape(count, 3).copy()


def _jsonable(obj):
    """Recursively coerce numpy scalars/arrays; map non-finite to null."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)  # before int: bool is an int subclass
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    return obj


def write_json(path, payload: dict) -> None:
    with open(path, "w") as handle:
        json.dump(_jsonable(payload), handle, indent=2, sort_keys=True)
        handle.write("\n")


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(path, config: dict, artifacts, seed, wall_time: float) -> None:
    """Run manifest: config echo, versions, seed, wall time, and a checksum
    for every emitted artifact (paths recorded relative to the manifest)."""
    import scipy

    from . import __version__

    base = Path(path).parent
    entries = []
    for artifact in artifacts:
        artifact = Path(artifact)
        entries.append({"path": str(artifact.relative_to(base)),
                        "bytes": artifact.stat().st_size,
                        "sha256": sha256_file(artifact)})
    write_json(path, {
        "config": config,
        "versions": {"python": sys.version.split()[0],
                     "numpy": np.__version__,
                     "scipy": scipy.__version__,
                     "spheremin": __version__},
        "seed": seed,
        "wall_time_s": wall_time,
        "artifacts": entries,
    })
