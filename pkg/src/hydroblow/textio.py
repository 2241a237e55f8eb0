"""Deterministic text output: CSV tables and flat key-value documents.

All numeric output uses 17 significant digits (lossless binary64 round
trip), LF line endings, and no timestamps, so identical inputs produce
byte-identical files.
"""

from __future__ import annotations

from typing import Iterable, Mapping


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    if v is None:
        return ""
    return str(v)


def csv_text(header: Iterable[str], rows: Iterable[Iterable]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    return "\n".join(lines) + "\n"


def keyvalue_text(doc: Mapping[str, object]) -> str:
    """Flat `key = value` document, one entry per line, insertion order."""
    lines = [f"{k} = {format_value(v)}" for k, v in doc.items()]
    return "\n".join(lines) + "\n"


def parse_keyvalue(text: str) -> dict:
    """Parse a flat key-value document; values are floats where possible."""
    out: dict = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if value == "true":
            out[key] = True
        elif value == "false":
            out[key] = False
        elif value == "":
            out[key] = None
        else:
            try:
                f = float(value)
                out[key] = int(f) if f.is_integer() and "." not in value and "e" not in value.lower() else f
            except ValueError:
                out[key] = value
    return out


def _parse_cell(v: str):
    if v == "":
        return None
    try:
        return float(v)
    except ValueError:
        return v


def parse_csv(text: str) -> tuple[list[str], list[list]]:
    """Parse a CSV produced by csv_text; cells are floats where possible."""
    lines = [ln for ln in text.splitlines() if ln]
    header = lines[0].split(",")
    rows = [[_parse_cell(v) for v in ln.split(",")] for ln in lines[1:]]
    return header, rows
