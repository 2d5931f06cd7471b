from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import tempfile
from typing import Any, Dict, List, Optional, Sequence

from .logging_utils import log_with_context

CSV_SIGNIFICANT_DIGITS = 12
FORMATS = ("csv", "json")


def write_text_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)

    temp_path: Optional[str] = None
    try:
        with tempfile.NamedTemporaryFile(
            mode="w",
            encoding="utf-8",
            dir=directory,
            delete=False,
            newline="",
        ) as temp_file:
            temp_file.write(text)
            temp_file.flush()
            os.fsync(temp_file.fileno())
            temp_path = temp_file.name

        os.replace(temp_path, path)
        temp_path = None
    finally:
        if temp_path and os.path.exists(temp_path):
            try:
                os.remove(temp_path)
            except OSError:
                log_with_context(
                    logging.WARNING,
                    "Failed cleaning temporary output file",
                    temp_path=temp_path,
                )


def write_json_atomic(path: str, data: Any, *, indent: Optional[int] = None) -> None:
    write_text_atomic(path, json.dumps(data, indent=indent) + "\n")


def format_csv_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return f"{value:.{CSV_SIGNIFICANT_DIGITS}g}"
    return str(value)


def render_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_csv_value(value) for value in row])
    return buffer.getvalue()


def _json_value(value: Any) -> Any:
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def render_json(header: Sequence[str], rows: Sequence[Sequence[Any]], **extra: Any) -> str:
    records: List[Dict[str, Any]] = [
        {key: _json_value(value) for key, value in zip(header, row)} for row in rows
    ]
    payload: Dict[str, Any] = {"columns": list(header), "rows": records}
    payload.update(extra)
    return json.dumps(payload, indent=2) + "\n"


def render_rows(header: Sequence[str], rows: Sequence[Sequence[Any]], fmt: str, **extra: Any) -> str:
    """CSV (12 significant digits) or JSON (full precision); ``extra`` only reaches JSON."""
    if fmt == "csv":
        return render_csv(header, rows)
    if fmt == "json":
        return render_json(header, rows, **extra)
    raise ValueError(f"unknown output format {fmt!r}; choose one of {', '.join(FORMATS)}")


def parse_csv(text: str) -> List[Dict[str, Optional[float]]]:
    """Numeric CSV back to records; empty cells become None and text cells stay text."""
    records: List[Dict[str, Optional[float]]] = []
    for row in csv.DictReader(io.StringIO(text)):
        record: Dict[str, Any] = {}
        for key, cell in row.items():
            if cell == "":
                record[key] = None
                continue
            try:
                record[key] = float(cell)
            except ValueError:
                record[key] = cell
        records.append(record)
    return records
