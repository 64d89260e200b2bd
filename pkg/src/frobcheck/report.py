"""Deterministic report documents: a CSV table or a JSON document with a schema version."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

SCHEMA_VERSION = "1.0"


def plain(x):
    """Convert numpy, mpmath and Fraction values to JSON-ready builtins."""
    if isinstance(x, dict):
        return {str(k): plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return [plain(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, str) or x is None:
        return x
    if hasattr(x, "imag"):
        z = complex(x)
        return {"re": z.real, "im": z.imag}
    if hasattr(x, "__float__"):
        return float(x)
    return str(x)


@dataclass
class Document:
    command: str
    manifold: str
    config: dict
    rows: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "manifold": self.manifold,
            "config": plain(self.config),
            "rows": plain(self.rows),
            "summary": plain(self.summary),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True, allow_nan=True) + "\n"

    def to_csv(self) -> str:
        rows = [_flat(r) for r in plain(self.rows)]
        cols = []
        for r in rows:
            for k in r:
                if k not in cols:
                    cols.append(k)
        buf = io.StringIO()
        buf.write(f"# schema_version={SCHEMA_VERSION} command={self.command} manifold={self.manifold}\n")
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow(r)
        for k, v in sorted(_flat(plain(self.summary)).items()):
            buf.write(f"# {k}={v}\n")
        return buf.getvalue()

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return self.to_json()
        if fmt == "table":
            return self.to_csv()
        raise ValueError(f"unknown format {fmt!r}")


def _flat(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flat(v, key + "."))
        elif isinstance(v, list):
            out[key] = json.dumps(v)
        else:
            out[key] = repr(v) if isinstance(v, float) else v
    return out
