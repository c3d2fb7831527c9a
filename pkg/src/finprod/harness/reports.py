"""Report serialization: canonical JSON payloads, CSV tables, write-once files.

The payload section of a report is the byte-reproducibility contract:
given (config, seed, single thread) its canonical serialization is
identical across runs. Wall-clock and file paths live in a separate meta
section excluded from that contract. Report files are never overwritten;
a numeric suffix is appended instead, so a report directory is append-only.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from dataclasses import dataclass
from pathlib import Path

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ExperimentReport:
    payload: dict
    wall_clock_s: float
    paths: dict

    @property
    def passed(self) -> bool:
        return bool(self.payload["passed"])


def jsonable(obj):
    """Recursively convert numpy scalars/containers to plain Python."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, bool):
        return obj
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def canonical_bytes(payload: dict) -> bytes:
    return json.dumps(
        jsonable(payload), sort_keys=True, separators=(",", ":"), ensure_ascii=True
    ).encode("ascii")


def payload_hash(payload: dict) -> str:
    return hashlib.sha256(canonical_bytes(payload)).hexdigest()


def build_payload(config_payload: dict, records, summary, passed: bool) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "config": jsonable(config_payload),
        "records": jsonable(records),
        "summary": jsonable(summary),
        "passed": bool(passed),
    }


def _fresh_path(path: Path) -> Path:
    if not path.exists():
        return path
    stem, suffix = path.stem, path.suffix
    k = 1
    while True:
        candidate = path.with_name(f"{stem}-{k}{suffix}")
        if not candidate.exists():
            return candidate
        k += 1


def write_report_json(payload: dict, wall_clock_s: float, path: Path) -> Path:
    path = _fresh_path(Path(path))
    doc = {
        "payload": jsonable(payload),
        "meta": {
            "wall_clock_s": wall_clock_s,
            "written_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "payload_sha256": payload_hash(payload),
        },
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="ascii") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return path


def write_records_csv(records, path: Path) -> Path | None:
    if not records:
        return None
    path = _fresh_path(Path(path))
    fields: list[str] = []
    for r in records:
        for k in r:
            if k not in fields:
                fields.append(k)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, restval="")
        writer.writeheader()
        for r in records:
            writer.writerow({k: _csv_cell(v) for k, v in r.items()})
    return path


def _csv_cell(v):
    v = jsonable(v)
    if isinstance(v, (list, dict)):
        return json.dumps(v, separators=(",", ":"))
    return v
