"""Tiny tabular container with deterministic CSV round-tripping.

CSV files written here are byte-identical across runs for identical inputs:
floats are formatted with 17 significant digits (enough to round-trip IEEE
doubles), comment lines start with '#', and the header is a plain
comma-separated column list.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError


def format_float(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x:.17g}"


@dataclass
class Table:
    columns: list[str]
    rows: np.ndarray  # shape (n_rows, n_columns), float64
    comments: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.rows = np.atleast_2d(np.asarray(self.rows, dtype=float))
        if self.rows.size == 0:
            self.rows = self.rows.reshape(0, len(self.columns))
        if self.rows.shape[1] != len(self.columns):
            raise ValueError(
                f"row width {self.rows.shape[1]} does not match "
                f"{len(self.columns)} columns"
            )

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.columns.index(name)]

    def write_csv(self, path: str | Path) -> Path:
        path = Path(path)
        lines = [f"# {c}" for c in self.comments]
        lines.append(",".join(self.columns))
        for row in self.rows:
            lines.append(",".join(format_float(v) for v in row))
        path.write_text("\n".join(lines) + "\n")
        return path


def read_table(path: str | Path) -> Table:
    """Read a CSV written by :meth:`Table.write_csv` (or compatible input).

    Lines starting with '#' are comments; the first non-comment line is the
    header.  All data cells must parse as floats.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"input file not found: {path}")
    comments: list[str] = []
    header: list[str] | None = None
    data: list[list[float]] = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            comments.append(line.lstrip("# "))
            continue
        if header is None:
            header = [c.strip() for c in line.split(",")]
            continue
        cells = line.split(",")
        if len(cells) != len(header):
            raise ConfigError(f"{path}:{lineno}: expected {len(header)} cells, got {len(cells)}")
        try:
            data.append([float(c) for c in cells])
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: non-numeric cell ({exc})") from exc
    if header is None:
        raise ConfigError(f"{path}: no header line found")
    rows = np.asarray(data, dtype=float).reshape(len(data), len(header))
    return Table(columns=header, rows=rows, comments=comments)
