"""Deterministic artifact serialization shared by the pipeline stages.

Every number is written with fixed six-decimal formatting and every JSON
document with sorted keys, so identical inputs produce byte-identical
output files and golden-file comparison stays meaningful.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path


def fmt(value) -> str:
    """CSV cell formatting: floats at six decimals, everything else as-is."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if not math.isfinite(value):
            return ""
        return f"{value:.6f}"
    if value is None:
        return ""
    return str(value)


def round6(obj):
    """Recursively round floats for JSON emission; non-finite becomes None."""
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return None
        return round(obj, 6)
    if isinstance(obj, dict):
        return {k: round6(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round6(v) for v in obj]
    return obj


def dump_json(obj, path) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(round6(obj), fh, ensure_ascii=False, sort_keys=True,
                  indent=2)
        fh.write("\n")


def write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()
