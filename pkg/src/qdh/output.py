"""Deterministic CSV/JSON emission of result tables plus a metadata sidecar."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from . import __version__

FLOAT_DIGITS = 12


@dataclass
class Table:
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} values, table has {len(self.columns)} columns")
        self.rows.append(tuple(values))

    def records(self) -> list[dict[str, Any]]:
        return [dict(zip(self.columns, r)) for r in self.rows]

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]


def format_value(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return format(v, f".{FLOAT_DIGITS}g")
    if v is None:
        return ""
    return str(v)


def _json_value(v):
    if isinstance(v, bool) or v is None:
        return v
    if isinstance(v, float):
        return None if math.isnan(v) else float(format(v, f".{FLOAT_DIGITS}g"))
    if hasattr(v, "item"):
        return _json_value(v.item())
    return v


def render(table: Table, fmt: str = "csv") -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(table.columns)
        for r in table.rows:
            w.writerow([format_value(v) for v in r])
        return buf.getvalue()
    if fmt == "json":
        recs = [{k: _json_value(v) for k, v in rec.items()} for rec in table.records()]
        return json.dumps(recs, indent=2) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def metadata(command: str, config: dict[str, Any], seed: int) -> dict[str, Any]:
    return {
        "artifact": "qdh",
        "version": __version__,
        "command": command,
        "seed": seed,
        "config": {k: _json_value(v) if not isinstance(v, (list, tuple)) else [_json_value(x) for x in v]
                   for k, v in sorted(config.items())},
    }


def sidecar_path(out: Path) -> Path:
    return out.with_name(out.name + ".meta.json")


def emit(table: Table, out: str | Path, fmt: str, meta: dict[str, Any]) -> Sequence[Path]:
    """Write ``table`` to ``out`` and ``meta`` to ``<out>.meta.json``.

    Raises ``OSError`` with the offending path in the message.
    """
    out = Path(out)
    side = sidecar_path(out)
    try:
        if out.parent and not out.parent.exists():
            out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(render(table, fmt), encoding="utf-8")
        side.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write results to {out}: {exc.strerror or exc}") from exc
    return out, side
