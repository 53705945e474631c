"""Small JSONL read/write helpers shared by the CLI stages."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable


def write_jsonl(path, rows: Iterable[dict]) -> int:
    """Write rows as UTF-8 JSONL with stable key order; returns the row count."""
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps(row, ensure_ascii=False, sort_keys=True))
            handle.write("\n")
            count += 1
    return count


def read_jsonl(path) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                rows.append(json.loads(line))
    return rows


def ensure_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out
