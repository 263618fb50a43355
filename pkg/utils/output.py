"""Self-describing result artifacts.

Every command returns a ResultTable. It renders to:
- CSV: `# key: <json value>` metadata lines (sorted keys), then a header row
  and data rows, comma separated, LF line endings
- JSON: {"metadata": ..., "columns": [...], "rows": [[...], ...]} with the same values

Floats use the shortest round-trip representation and no timestamps are
written, so identical inputs always produce byte-identical files.
"""

import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

logger = logging.getLogger(__name__)

OUTPUT_FORMATS = ("csv", "json")


@dataclass
class ResultTable:
    """Columns, rows and metadata produced by one command."""

    columns: list[str]
    rows: list[list[Any]] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)

    def add_row(self, *values: Any) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"Expected {len(self.columns)} values, got {len(values)}")
        self.rows.append(list(values))

    def column(self, name: str) -> list[Any]:
        index = self.columns.index(name)
        return [row[index] for row in self.rows]


def format_cell(value: Any) -> str:
    """Text form of one CSV cell (empty for None)."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float | np.floating):
        return repr(float(value))
    return str(value)


def _json_safe(value: Any) -> Any:
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [_json_safe(v) for v in value]
    return value


def render_csv(table: ResultTable) -> str:
    buffer = io.StringIO()
    for key in sorted(table.metadata):
        encoded = json.dumps(_json_safe(table.metadata[key]), sort_keys=True)
        buffer.write(f"# {key}: {encoded}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_cell(v) for v in row])
    return buffer.getvalue()


def render_json(table: ResultTable) -> str:
    document = {
        "metadata": _json_safe(table.metadata),
        "columns": table.columns,
        "rows": _json_safe(table.rows),
    }
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def render(table: ResultTable, fmt: str) -> str:
    """
    Render a table in the requested format.

    Raises:
        ValueError: If the format is unknown
    """
    if fmt == "csv":
        return render_csv(table)
    if fmt == "json":
        return render_json(table)
    raise ValueError(f"Unknown output format '{fmt}'. Choose one of: {', '.join(OUTPUT_FORMATS)}")


def write_table(table: ResultTable, out: str | None, fmt: str) -> None:
    """
    Write a rendered table to a file, or to stdout when out is None or "-".

    The parent directory of out is created if needed.
    """
    text = render(table, fmt)
    if out in (None, "-"):
        sys.stdout.write(text)
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")
    logger.info(f"Wrote {len(table.rows)} rows to {path}")
