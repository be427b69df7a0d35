"""SVG rendering of the delimited table artifacts.

Plots are always produced from an already-written CSV file so the numeric
pipeline never depends on this module.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .tableio import read_table

_X_LABELS = {"lambda_m": "wavelength (m)", "t": "coupling t"}


def render_table_plot(csv_path: str | Path, svg_path: str | Path,
                      title: str | None = None, logy: bool = False) -> Path:
    """Line plot of every column of a CSV table against its first column."""
    table = read_table(csv_path)
    x_name = table.columns[0]
    x = table.column(x_name)
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    style = {"marker": "o", "linestyle": "none"} if len(x) < 3 else {}
    for name in table.columns[1:]:
        ax.plot(x, table.column(name), label=name, **style)
    ax.set_xlabel(_X_LABELS.get(x_name, x_name))
    ax.set_ylabel("value")
    if logy:
        ax.set_yscale("log")
    if len(table.columns) > 2:
        ax.legend(loc="best", fontsize="small")
    else:
        ax.set_ylabel(table.columns[1] if len(table.columns) > 1 else "value")
    ax.set_title(title or Path(csv_path).stem)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    svg_path = Path(svg_path)
    fig.savefig(svg_path, format="svg")
    plt.close(fig)
    return svg_path


def render_fit_plot(csv_path: str | Path, svg_path: str | Path) -> Path:
    """Overlay of measured and fitted normalized transmission."""
    table = read_table(csv_path)
    lam = table.column("lambda_m")
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.plot(lam, table.column("power"), "o", markersize=3, alpha=0.6, label="data")
    ax.plot(lam, table.column("model"), "-", label="fit")
    ax.set_xlabel("wavelength (m)")
    ax.set_ylabel("normalized power")
    ax.legend(loc="best")
    ax.set_title(Path(csv_path).stem)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    svg_path = Path(svg_path)
    fig.savefig(svg_path, format="svg")
    plt.close(fig)
    return svg_path
