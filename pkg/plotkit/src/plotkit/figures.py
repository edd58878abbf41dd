"""Renderers for phase portraits, command traces, and log-scale decay plots.

Boundary overlays come from polyline CSVs exported by the simulation CLI's
verify command, so no controller formulas live here.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .io import TrajectoryTable, load_trajectory  # noqa: E402

KINDS = ("phase", "control", "lyapunov-log")

# overlay key -> draw style; keys match the verify command's exported files
OVERLAY_STYLES = {
    "s": {"color": "0.35", "linestyle": "-", "linewidth": 1.2, "label": "target set"},
    "d0": {"color": "tab:red", "linestyle": "--", "linewidth": 1.0, "label": "saturation boundary"},
    "dm": {"color": "black", "linestyle": ":", "linewidth": 1.2, "label": "terminal region"},
}


class SaturationError(ValueError):
    """A plotted command sample violates the stated input bound."""


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: kind, input CSVs, optional overlays and input bound."""

    kind: str
    inputs: list[str]
    overlays: dict[str, str] = field(default_factory=dict)
    u_max: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got '{self.kind}'")
        if not self.inputs:
            raise ValueError("at least one input CSV is required")


def load_overlay(path: str | Path) -> np.ndarray | None:
    """Polyline (m, 2) from a boundary CSV; None (with a warning) when empty."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        rows = [(float(a), float(b)) for a, b in reader]
    if header != ["x1", "x2"] or len(rows) < 2:
        warnings.warn(f"overlay {path} is empty or malformed; skipped", stacklevel=2)
        return None
    return np.asarray(rows)


def _assert_saturation(tables: list[TrajectoryTable], u_max: float) -> None:
    for table in tables:
        worst = float(np.max(np.abs(table.u)))
        if worst > u_max + 1e-9:
            raise SaturationError(
                f"{table.path}: max |u| = {worst:.12g} exceeds the bound {u_max}"
            )


def render(spec: FigureSpec, out: str | Path) -> Path:
    """Draw the figure and write it to ``out``; inputs are never modified."""
    tables = [load_trajectory(p) for p in spec.inputs]
    if spec.u_max is not None:
        _assert_saturation(tables, spec.u_max)

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    if spec.kind == "phase":
        _render_phase(ax, tables, spec)
    elif spec.kind == "control":
        _render_control(ax, tables, spec)
    else:
        _render_lyapunov_log(ax, tables)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    out = Path(out)
    fig.savefig(out, dpi=130)
    plt.close(fig)
    return out


def _render_phase(ax, tables, spec):
    for table in tables:
        label = Path(table.path).parent.name or Path(table.path).stem
        (line,) = ax.plot(table.x1, table.x2, linewidth=1.0, label=label)
        ax.plot(table.x1[0], table.x2[0], "o", color=line.get_color(), markersize=4)
    for key, path in spec.overlays.items():
        pts = load_overlay(path)
        if pts is None:
            continue
        style = OVERLAY_STYLES.get(key, {"linestyle": "-."})
        ax.plot(pts[:, 0], pts[:, 1], **style)
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_aspect("equal")
    ax.legend(fontsize=7, loc="upper right")


def _render_control(ax, tables, spec):
    for table in tables:
        label = Path(table.path).parent.name or Path(table.path).stem
        ax.plot(table.t, table.u, linewidth=1.0, label=label)
    if spec.u_max is not None:
        ax.axhline(spec.u_max, color="0.3", linestyle="--", linewidth=1.0)
        ax.axhline(-spec.u_max, color="0.3", linestyle="--", linewidth=1.0)
    ax.set_xlabel("t [s]")
    ax.set_ylabel("u")
    ax.legend(fontsize=7, loc="lower right")


def _render_lyapunov_log(ax, tables):
    for table in tables:
        label = Path(table.path).parent.name or Path(table.path).stem
        ax.semilogy(table.t, table.v, linewidth=1.0, label=label)
    ax.set_xlabel("t [s]")
    ax.set_ylabel("V")
    ax.legend(fontsize=7, loc="lower left")
