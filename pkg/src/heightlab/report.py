"""Report emission (json, csv, text) and experiment manifests.

Payloads are plain dicts/lists of strings, numbers and booleans. Floats are
already rendered by format_float, so the bytes depend only on the inputs
and the precision policy; manifests store a digest of those bytes.
"""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

from . import __version__

FORMATS = ("json", "csv", "text")


def _flat(value: Any) -> str:
    if isinstance(value, (dict, list)):
        return json.dumps(value, sort_keys=True, separators=(",", ":"))
    if isinstance(value, bool):
        return "true" if value else "false"
    return "" if value is None else str(value)


def records_of(payload: Any) -> list[dict]:
    """Tabular view: payload["rows"] if present, a list of dicts as is,
    otherwise the payload as a single record."""
    if isinstance(payload, list):
        return [r if isinstance(r, dict) else {"value": r} for r in payload]
    if isinstance(payload, dict):
        if isinstance(payload.get("rows"), list):
            return payload["rows"]
        return [payload] if payload else []
    return [{"value": payload}]


def emit_report(payload: Any, fmt: str = "json", columns: Optional[Sequence[str]] = None) -> bytes:
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; use one of {FORMATS}")
    if fmt == "json":
        return (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode()
    if fmt == "csv":
        rows = records_of(payload)
        cols = list(columns) if columns else list(dict.fromkeys(k for r in rows for k in r))
        if not cols:
            return b""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_flat(r.get(c)) for c in cols])
        return buf.getvalue().encode()
    lines: list[str] = []
    _text(payload, 0, lines)
    return ("\n".join(lines) + ("\n" if lines else "")).encode()


def _text(value: Any, depth: int, out: list) -> None:
    pad = "  " * depth
    if isinstance(value, dict):
        for k in sorted(value):
            v = value[k]
            if isinstance(v, (dict, list)) and v:
                out.append(f"{pad}{k}:")
                _text(v, depth + 1, out)
            else:
                out.append(f"{pad}{k}: {_flat(v)}")
    elif isinstance(value, list):
        for i, v in enumerate(value):
            if isinstance(v, (dict, list)):
                out.append(f"{pad}- [{i}]")
                _text(v, depth + 1, out)
            else:
                out.append(f"{pad}- {_flat(v)}")
    elif value is not None:
        out.append(f"{pad}{_flat(value)}")


def digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


@dataclass
class ExperimentManifest:
    command: str
    inputs: dict
    version: str = __version__
    timestamp: str = ""
    output_digest: str = ""
    format: str = "json"
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    def write(self, path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentManifest":
        known = {k: d[k] for k in ("command", "inputs", "version", "timestamp", "output_digest", "format", "extra") if k in d}
        if "command" not in known or "inputs" not in known:
            raise ValueError("manifest needs 'command' and 'inputs'")
        return cls(**known)


def make_manifest(command: str, inputs: dict, report: bytes, fmt: str) -> ExperimentManifest:
    ts = _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()
    return ExperimentManifest(command, dict(sorted(inputs.items())), __version__, ts, digest(report), fmt)


def load_manifest(path) -> ExperimentManifest:
    return ExperimentManifest.from_dict(json.loads(Path(path).read_text()))


def load_report(data: bytes) -> Any:
    """Inverse of emit_report(..., "json")."""
    return json.loads(data.decode())
