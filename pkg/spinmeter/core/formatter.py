"""Full-precision text formatting for result tables and summaries.

Pure functions. Floats are written with 17 significant digits so every
value reloads to the identical double.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

SIGNIFICANT_DIGITS = 17
NEWLINE = "\n"


@dataclass(frozen=True)
class Table:
    """Named columns of equal length; ``columns`` holds (name, unit) pairs."""

    name: str
    columns: tuple[tuple[str, str], ...]
    data: np.ndarray

    def __post_init__(self):
        data = np.atleast_2d(np.asarray(self.data, dtype=float))
        if data.shape[1] != len(self.columns):
            raise ValueError(
                f"table {self.name!r}: {data.shape[1]} data columns, {len(self.columns)} labels"
            )
        object.__setattr__(self, "data", data)

    @classmethod
    def from_columns(cls, name: str, columns: list[tuple[str, str, np.ndarray]]) -> "Table":
        labels = tuple((n, u) for n, u, _ in columns)
        data = np.column_stack([np.asarray(v, dtype=float) for _, _, v in columns])
        return cls(name, labels, data)

    def column(self, name: str) -> np.ndarray:
        for i, (n, _) in enumerate(self.columns):
            if n == name:
                return self.data[:, i]
        raise KeyError(name)


def format_float(value: float) -> str:
    """17 significant digits; round-trips exactly."""
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.{SIGNIFICANT_DIGITS}g}"


def column_label(name: str, unit: str) -> str:
    """Header cell ``name [unit]``; dimensionless columns use ``[1]``."""
    return f"{name} [{unit or '1'}]"


def format_table(table: Table) -> str:
    """CSV text: one header line, LF endings, trailing newline."""
    lines = [",".join(column_label(n, u) for n, u in table.columns)]
    for row in table.data:
        lines.append(",".join(format_float(v) for v in row))
    return NEWLINE.join(lines) + NEWLINE


def parse_table(text: str) -> tuple[list[str], np.ndarray]:
    """Inverse of format_table: header labels and the float data."""
    header, *rows = text.rstrip(NEWLINE).split(NEWLINE)
    data = np.array([[float(v) for v in row.split(",")] for row in rows])
    return header.split(","), data


def jsonable(obj):
    """Convert numpy values, tuples and non-finite floats for JSON output."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else format_float(v)
    if isinstance(obj, complex):
        return {"re": jsonable(obj.real), "im": jsonable(obj.imag)}
    return obj


def format_summary(summary: dict) -> str:
    """Stable JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(jsonable(summary), indent=2, sort_keys=True) + NEWLINE
