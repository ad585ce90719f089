"""Artifact emission: deterministic CSV/JSON files written atomically, with checksums."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence


@dataclass(frozen=True)
class EmittedArtifact:
    path: Path
    kind: str
    checksum: str

    def __str__(self) -> str:
        return f"{self.kind}\t{self.path}\tsha256:{self.checksum}"


def fmt(x) -> str:
    """CSV cell: 17 significant digits for floats, empty for missing values."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float) or hasattr(x, "__float__"):
        x = float(x) + 0.0  # folds -0.0 into 0.0
        if math.isnan(x):
            return "nan"
        return format(x, ".17g")
    return str(x)


def atomic_write(path: Path, data: bytes) -> str:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return hashlib.sha256(data).hexdigest()


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> EmittedArtifact:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(x) for x in row])
    return EmittedArtifact(Path(path), "csv", atomic_write(path, buf.getvalue().encode("utf-8")))


def read_csv(path: Path) -> tuple[list[str], list[dict[str, str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
        return list(reader.fieldnames or []), rows


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, int)):
        return obj
    if hasattr(obj, "__float__"):
        x = float(obj) + 0.0
        return x if math.isfinite(x) else str(x)
    return str(obj)


def write_json(path: Path, payload: dict) -> EmittedArtifact:
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"
    return EmittedArtifact(Path(path), "json", atomic_write(path, text.encode("utf-8")))


def write_bytes(path: Path, data: bytes, kind: str) -> EmittedArtifact:
    return EmittedArtifact(Path(path), kind, atomic_write(path, data))


# JSON summary schemas (draft 2020-12). Documented in the README.

_NUM = {"type": "number"}
_NUM_OR_NULL = {"type": ["number", "null"]}

_COMMON = {
    "command": {"type": "string"},
    "version": {"type": "string"},
    "params": {"type": "object"},
}

SUMMARY_SCHEMAS: dict[str, dict] = {
    "derive": {
        "type": "object",
        "required": ["command", "version", "params", "derived", "stability"],
        "properties": {
            **_COMMON,
            "derived": {
                "type": "object",
                "required": [
                    "kappa", "omega_c", "g0", "e_mag", "alpha_s", "g", "n_bar", "delta",
                    "omega_m", "gamma_m", "weak_coupling", "resolved_sideband", "coupling_ratio",
                ],
            },
            "stability": {
                "type": "object",
                "required": ["c1", "c2", "stable"],
                "properties": {"c1": _NUM, "c2": _NUM, "stable": {"type": "boolean"}},
            },
        },
    },
    "fidelity-sweep": {
        "type": "object",
        "required": ["command", "version", "params", "points", "n_failed"],
        "properties": {
            **_COMMON,
            "n_failed": {"type": "integer"},
            "points": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["t_us", "fidelity", "n_eff", "log_negativity", "heralding_weight", "error"],
                    "properties": {"t_us": _NUM, "fidelity": _NUM_OR_NULL, "error": {"type": ["string", "null"]}},
                },
            },
        },
    },
    "wigner": {
        "type": "object",
        "required": [
            "command", "version", "params", "source", "time_us", "extent", "resolution",
            "min_value", "min_location", "normalization", "normalization_residual",
        ],
        "properties": {
            **_COMMON,
            "source": {"type": "string"},
            "time_us": _NUM_OR_NULL,
            "extent": _NUM,
            "resolution": {"type": "integer"},
            "min_value": _NUM,
            "min_location": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
            "normalization": _NUM,
            "normalization_residual": _NUM,
        },
    },
    "phonon-stats": {
        "type": "object",
        "required": ["command", "version", "params", "source", "time_us", "probabilities", "mode", "clamped"],
        "properties": {
            **_COMMON,
            "probabilities": {"type": "array", "items": _NUM},
            "mode": {"type": "integer"},
            "clamped": {"type": "array", "items": {"type": "integer"}},
        },
    },
    "temp-sweep": {
        "type": "object",
        "required": ["command", "version", "params", "records"],
        "properties": {
            **_COMMON,
            "records": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["T_mK", "t_us", "fidelity", "n_eff", "log_negativity", "phonon", "error"],
                },
            },
        },
    },
    "entanglement": {
        "type": "object",
        "required": ["command", "version", "params", "points", "max_log_negativity"],
        "properties": {
            **_COMMON,
            "points": {
                "type": "array",
                "items": {"type": "object", "required": ["t_us", "log_negativity", "n_eff"]},
            },
            "max_log_negativity": _NUM,
        },
    },
}
