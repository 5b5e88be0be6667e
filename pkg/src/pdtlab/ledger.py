"""Append-only JSON-lines results ledger.

One JSON object per line. Entries are only ever appended; a re-run adds a
new line instead of touching old ones.
"""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

LEDGER_ENV = "PDTLAB_LEDGER"

REQUIRED = {
    "kind": str,
    "function_id": str,
    "n": int,
    "started": str,
    "finished": str,
    "tool_version": str,
}


class LedgerError(ValueError):
    pass


def now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


@dataclass
class LedgerEntry:
    kind: str  # measures | solve | strategy | refute | reduce-thr | circuit
    function_id: str
    n: int
    started: str
    finished: str
    tool_version: str
    spar: int | None = None
    gran: int | None = None
    deg2: int | None = None
    cert: int | None = None
    bounds: dict | None = None
    exact_depth: int | None = None
    interval: list | None = None
    strategy: dict | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None and v != {}}


def validate(obj: dict) -> None:
    for key, typ in REQUIRED.items():
        if not isinstance(obj.get(key), typ):
            raise LedgerError(f"ledger entry lacks a valid {key!r}")
    if "exact_depth" in obj and "interval" in obj:
        raise LedgerError("entry has both exact_depth and interval")
    if "interval" in obj:
        lo, hi = obj["interval"]
        if lo > hi:
            raise LedgerError("interval lower bound exceeds upper bound")
    for key in ("spar", "gran", "deg2", "cert", "exact_depth"):
        if key in obj and not isinstance(obj[key], int):
            raise LedgerError(f"{key} must be an integer")


def resolve_path(path: str | None) -> str | None:
    return path or os.environ.get(LEDGER_ENV) or None


def append(path: str, entry: LedgerEntry) -> dict:
    obj = entry.to_json()
    validate(obj)
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(obj, sort_keys=True) + "\n")
    return obj


def read(path: str) -> list[dict]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise LedgerError(f"line {lineno}: {exc}") from None
            validate(obj)
            out.append(obj)
    return out
