"""Delimited result tables with a reproducibility metadata header.

Tables are written as CSV with ``#``-prefixed ``key=value`` metadata lines,
one table per file.  Values are rendered with shortest round-tripping
float representations so a file read back compares equal bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

__all__ = ["ResultTable", "read_csv"]


def _format_value(value: float) -> str:
    # repr() of a float is the shortest string that round-trips exactly
    return repr(float(value))


@dataclass
class ResultTable:
    """Column names, float rows and the metadata needed to regenerate them."""

    columns: list[str]
    rows: list[list[float]]
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        width = len(self.columns)
        for row in self.rows:
            if len(row) != width:
                raise ValidationError(
                    f"row of width {len(row)} does not match {width} columns"
                )

    def column(self, name: str) -> np.ndarray:
        try:
            idx = self.columns.index(name)
        except ValueError:
            raise ValidationError(f"no column named {name!r}") from None
        return np.array([row[idx] for row in self.rows])

    def to_csv_text(self) -> str:
        lines = [f"# {key}={value}" for key, value in self.metadata.items()]
        lines.append(",".join(self.columns))
        for row in self.rows:
            lines.append(",".join(_format_value(v) for v in row))
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(self.to_csv_text())


def read_csv(path) -> ResultTable:
    """Parse a table written by :meth:`ResultTable.write_csv`."""
    metadata: dict[str, str] = {}
    columns: list[str] | None = None
    rows: list[list[float]] = []
    with open(path, "r", encoding="utf-8") as handle:
        for raw in handle:
            line = raw.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" not in body:
                    raise ValidationError(f"malformed metadata line: {line!r}")
                key, value = body.split("=", 1)
                metadata[key.strip()] = value
                continue
            if columns is None:
                columns = line.split(",")
                continue
            rows.append([float(token) for token in line.split(",")])
    if columns is None:
        raise ValidationError(f"{path}: no header row found")
    return ResultTable(columns=columns, rows=rows, metadata=metadata)
