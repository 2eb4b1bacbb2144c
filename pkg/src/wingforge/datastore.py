"""On-disk dataset of cases: binary field blobs, JSON manifests, split
files, and CSV import/export.

Layout: root/index.json, root/splits/*.json, root/cases/<id>/manifest.json
plus one .wfg blob per field.  Blobs are little-endian float32 with a
small header; writes go to temporary files and commit by atomic rename so
readers always see consistent snapshots.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .doe import CaseSpec, ParameterSpace, SplitAssignment

MAGIC = b"WFG1"


class DatastoreError(ValueError):
    """Corrupt, missing, or malformed dataset content."""


@dataclass
class CaseRecord:
    spec: CaseSpec
    fields: dict = field(default_factory=dict)  # name -> ndarray
    coefficients: Optional[dict] = None  # {"C_D":..., "C_l":..., ...}
    provenance: dict = field(default_factory=dict)


def _atomic_write(path: Path, data: bytes):
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as f:
        f.write(data)
        f.flush()
        os.fsync(f.fileno())
    os.replace(tmp, path)


def encode_blob(name: str, array) -> bytes:
    """Serialize an array: magic, name, element count, components, f32 data."""
    arr = np.asarray(array, dtype="<f4")
    if arr.ndim == 1:
        count, comps = arr.shape[0], 1
    elif arr.ndim == 2:
        count, comps = arr.shape
    else:
        raise DatastoreError(f"field {name!r} must be 1D or 2D")
    name_b = name.encode("utf-8")
    header = MAGIC + struct.pack("<H", len(name_b)) + name_b \
        + struct.pack("<II", count, comps)
    return header + arr.tobytes()


def decode_blob(data: bytes):
    """Inverse of encode_blob; returns (name, array)."""
    if len(data) < 4 or data[:4] != MAGIC:
        raise DatastoreError("unknown blob magic; not a WFG1 file")
    off = 4
    (name_len,) = struct.unpack_from("<H", data, off)
    off += 2
    name = data[off:off + name_len].decode("utf-8")
    off += name_len
    count, comps = struct.unpack_from("<II", data, off)
    off += 8
    expected = count * comps * 4
    payload = data[off:]
    if len(payload) != expected:
        raise DatastoreError(
            f"blob {name!r} truncated: expected {expected} data bytes, "
            f"got {len(payload)}")
    arr = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    return name, (arr if comps == 1 else arr.reshape(count, comps))


def write_case(record: CaseRecord, root) -> dict:
    """Write blobs and manifest under root/cases/<id>/; returns paths."""
    root = Path(root)
    case_dir = root / "cases" / record.spec.id
    case_dir.mkdir(parents=True, exist_ok=True)
    blobs = {}
    for name, arr in record.fields.items():
        blob = encode_blob(name, arr)
        path = case_dir / f"{name}.wfg"
        _atomic_write(path, blob)
        blobs[name] = {
            "file": path.name,
            "sha256": hashlib.sha256(blob).hexdigest(),
        }
    manifest = {
        "version": 1,
        "case": record.spec.to_dict(),
        "blobs": blobs,
        "provenance": record.provenance,
    }
    if record.coefficients is not None:
        for k, v in record.coefficients.items():
            if not math.isfinite(v):
                raise DatastoreError(f"coefficient {k} is not finite")
        # full-precision decimal text
        manifest["coefficients"] = {
            k: repr(float(v)) for k, v in record.coefficients.items()}
    manifest_path = case_dir / "manifest.json"
    _atomic_write(manifest_path, json.dumps(manifest, indent=2).encode())
    return {"manifest": manifest_path,
            "blobs": {n: case_dir / b["file"] for n, b in blobs.items()}}


def read_case(root, case_id) -> CaseRecord:
    """Read a case back, validating blob checksums."""
    case_dir = Path(root) / "cases" / case_id
    manifest_path = case_dir / "manifest.json"
    if not manifest_path.exists():
        raise DatastoreError(f"no manifest for case {case_id!r}")
    manifest = json.loads(manifest_path.read_text())
    if manifest.get("version") != 1:
        raise DatastoreError(
            f"unknown manifest version {manifest.get('version')!r}")
    fields = {}
    for name, info in manifest["blobs"].items():
        path = case_dir / info["file"]
        if not path.exists():
            raise DatastoreError(f"missing blob {path}")
        data = path.read_bytes()
        digest = hashlib.sha256(data).hexdigest()
        if digest != info["sha256"]:
            raise DatastoreError(f"checksum mismatch in {path}")
        blob_name, arr = decode_blob(data)
        fields[blob_name] = arr
    coeffs = None
    if "coefficients" in manifest:
        coeffs = {k: float(v) for k, v in manifest["coefficients"].items()}
    return CaseRecord(
        spec=CaseSpec.from_dict(manifest["case"]),
        fields=fields,
        coefficients=coeffs,
        provenance=manifest.get("provenance", {}),
    )


def write_index(root, cases, space: Optional[ParameterSpace] = None,
                split_file: Optional[str] = None):
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    index = {
        "version": 1,
        "cases": [c.to_dict() for c in cases],
        "space": space.to_dict() if space else None,
        "split_file": split_file,
    }
    _atomic_write(root / "index.json", json.dumps(index, indent=2).encode())


def read_index(root):
    path = Path(root) / "index.json"
    if not path.exists():
        raise DatastoreError(f"no index.json under {root}")
    index = json.loads(path.read_text())
    cases = [CaseSpec.from_dict(d) for d in index["cases"]]
    space = ParameterSpace.from_dict(index["space"]) if index.get("space") else None
    return cases, space, index.get("split_file")


def write_split(root, split: SplitAssignment, name="split",
                space: Optional[ParameterSpace] = None):
    splits_dir = Path(root) / "splits"
    splits_dir.mkdir(parents=True, exist_ok=True)
    path = splits_dir / f"{name}.json"
    _atomic_write(path, json.dumps(split.to_dict(space), indent=2).encode())
    return path


def read_split(path) -> SplitAssignment:
    d = json.loads(Path(path).read_text())
    return SplitAssignment(
        assignments={a["id"]: a["split"] for a in d["assignments"]},
        seed=d["seed"],
    )


def write_cases_jsonl(path, cases):
    """Case list as JSON lines, one CaseSpec per line."""
    tmp = Path(str(path) + ".tmp")
    with open(tmp, "w") as f:
        for c in cases:
            f.write(json.dumps(c.to_dict()) + "\n")
    os.replace(tmp, path)


def read_cases_jsonl(path):
    cases = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if line:
                cases.append(CaseSpec.from_dict(json.loads(line)))
    return cases


def query(cases, **intervals):
    """Case ids whose parameters fall inside the given closed intervals.

    Keyword arguments name parameters (c_r, b, taper, sweep_deg, U_inf,
    alpha_deg) with (lo, hi) tuples.  Stable ascending id order.
    """
    out = []
    for c in cases:
        d = c.to_dict()
        ok = True
        for name, (lo, hi) in intervals.items():
            if name not in d:
                raise DatastoreError(f"unknown parameter {name!r}")
            if not (lo <= d[name] <= hi):
                ok = False
                break
        if ok:
            out.append(c.id)
    return sorted(out)


def import_coefficients_csv(path):
    """Strict CSV parse: header id, C_D, C_l (+ optional alpha_deg,
    sweep_deg).  Non-numeric or non-finite cells are rejected with their
    row and column."""
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            raise DatastoreError("empty CSV")
        for col in ("id", "C_D", "C_l"):
            if col not in reader.fieldnames:
                raise DatastoreError(f"missing required column {col!r}")
        numeric_cols = [c for c in reader.fieldnames if c != "id"]
        rows = []
        for line_no, row in enumerate(reader, start=2):
            parsed = {"id": row["id"]}
            for col in numeric_cols:
                cell = row.get(col)
                try:
                    value = float(cell)
                except (TypeError, ValueError):
                    raise DatastoreError(
                        f"non-numeric cell at row {line_no}, column {col!r}: "
                        f"{cell!r}")
                if not math.isfinite(value):
                    raise DatastoreError(
                        f"non-finite value at row {line_no}, column {col!r}")
                parsed[col] = value
            rows.append(parsed)
    return rows


def export_results(records, path, fmt="csv"):
    """Write coefficient records as CSV or JSON.  Numeric values round-trip
    losslessly (repr / 17 significant digits)."""
    records = list(records)
    if fmt == "json":
        Path(path).write_text(json.dumps(records, indent=2))
        return
    if fmt != "csv":
        raise DatastoreError(f"unknown export format {fmt!r}")
    if not records:
        Path(path).write_text("")
        return
    cols = list(records[0].keys())
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(cols)
        for r in records:
            writer.writerow([
                r[c] if isinstance(r[c], str) else repr(float(r[c]))
                for c in cols])
