"""Render sweep and trajectory CSVs into the three standard figures.

Supported kinds:
  dim_sweep -- median iterations per game size with a min-max band
  err_sweep -- error level reached vs iterations, one marker per trial
  kl_trace  -- divergence and l1 error against iteration, log scale

Input schemas are enforced exactly; a mismatch reports the offending
column names rather than guessing.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

SWEEP_COLUMNS = ("point", "trial", "seed", "iterations", "converged", "final_l1_error", "wall_time_seconds")
TRACE_COLUMNS = ("iter", "kl", "l1_error", "alpha", "epsilon", "value", "kl_decrement", "normalizer_x", "normalizer_y")

KINDS = ("dim_sweep", "err_sweep", "kl_trace")
# (log x, log y) used when the spec leaves axes unset
DEFAULT_LOG_AXES = {
    "dim_sweep": (False, False),
    "err_sweep": (False, True),
    "kl_trace": (False, True),
}


class SchemaError(ValueError):
    """Input CSV does not match the published column contract."""


@dataclass(frozen=True)
class FigureSpec:
    input_csv: str
    kind: str
    output: str
    log_axes: tuple | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")

    @property
    def axes(self) -> tuple:
        return self.log_axes if self.log_axes is not None else DEFAULT_LOG_AXES[self.kind]


def _read_table(path, expected_columns):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: file is empty, expected header {','.join(expected_columns)}") from None
        missing = [c for c in expected_columns if c not in header]
        extra = [c for c in header if c not in expected_columns]
        if missing or extra:
            parts = []
            if missing:
                parts.append(f"missing column(s): {', '.join(missing)}")
            if extra:
                parts.append(f"unexpected column(s): {', '.join(extra)}")
            raise SchemaError(f"{path}: {'; '.join(parts)}")
        if tuple(header) != tuple(expected_columns):
            raise SchemaError(
                f"{path}: column order mismatch: expected {','.join(expected_columns)}, got {','.join(header)}"
            )
        rows = [row for row in reader if row]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    table = {name: [] for name in expected_columns}
    for row in rows:
        if len(row) != len(expected_columns):
            raise SchemaError(f"{path}: row with {len(row)} cells, expected {len(expected_columns)}")
        for name, cell in zip(expected_columns, row):
            table[name].append(cell)
    return table


def _floats(cells):
    return np.array([float(c) for c in cells])


def load_series(spec: FigureSpec) -> dict:
    """Extract the plotted data series from the CSV, as a pure function.

    Re-running on identical input yields identical arrays; rendering adds
    nothing beyond styling.
    """
    if spec.kind == "kl_trace":
        table = _read_table(spec.input_csv, TRACE_COLUMNS)
        return {
            "iter": _floats(table["iter"]),
            "kl": _floats(table["kl"]),
            "l1_error": _floats(table["l1_error"]),
        }

    table = _read_table(spec.input_csv, SWEEP_COLUMNS)
    points = _floats(table["point"])
    iterations = _floats(table["iterations"])
    if spec.kind == "dim_sweep":
        uniq = np.unique(points)
        med = np.array([np.median(iterations[points == p]) for p in uniq])
        lo = np.array([iterations[points == p].min() for p in uniq])
        hi = np.array([iterations[points == p].max() for p in uniq])
        return {"size": uniq, "median": med, "min": lo, "max": hi}
    # err_sweep: error level on y against the iterations that reached it
    order = np.argsort(iterations, kind="stable")
    return {
        "iterations": iterations[order],
        "error": points[order],
        "trial": _floats(table["trial"])[order],
    }


def render(spec: FigureSpec) -> Path:
    """Write the figure for ``spec`` and return the output path."""
    series = load_series(spec)
    log_x, log_y = spec.axes
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    try:
        if spec.kind == "dim_sweep":
            ax.fill_between(series["size"], series["min"], series["max"], alpha=0.25, label="min-max band")
            ax.plot(series["size"], series["median"], marker="o", label="median")
            ax.set_xlabel("game size n")
            ax.set_ylabel("iterations to target error")
            ax.legend()
        elif spec.kind == "err_sweep":
            for trial in np.unique(series["trial"]):
                mask = series["trial"] == trial
                ax.plot(
                    series["iterations"][mask],
                    series["error"][mask],
                    marker="o",
                    label=f"trial {int(trial)}",
                )
            ax.set_xlabel("iterations")
            ax.set_ylabel("l1 error reached")
            ax.legend()
        else:
            ax.plot(series["iter"], series["kl"], label="KL divergence")
            ax.plot(series["iter"], series["l1_error"], label="l1 error")
            ax.set_xlabel("iteration")
            ax.set_ylabel("distance to equilibrium")
            ax.legend()
        if log_x:
            ax.set_xscale("log")
        if log_y:
            ax.set_yscale("log")
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        fig.savefig(spec.output)
    finally:
        plt.close(fig)
    return Path(spec.output)
