"""Load and validate trajectory CSVs produced by the simulation CLI."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SCHEMA = ("t", "x1", "x2", "u", "V", "region", "set_distance", "warp_gain")


class LoadError(ValueError):
    """CSV does not conform to the trajectory schema."""


@dataclass(frozen=True)
class TrajectoryTable:
    """Typed columns of one trajectory CSV."""

    path: str
    t: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    u: np.ndarray
    v: np.ndarray
    region: np.ndarray
    set_distance: np.ndarray
    warp_gain: np.ndarray

    def __len__(self) -> int:
        return len(self.t)


def load_trajectory(path: str | Path) -> TrajectoryTable:
    """Read a trajectory CSV, checking the header and every cell.

    Raises LoadError naming the offending column on any schema mismatch,
    malformed row, or when fewer than two data rows are present.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise LoadError(f"{path}: empty file") from None
        if tuple(header) != SCHEMA:
            for i, want in enumerate(SCHEMA):
                got = header[i] if i < len(header) else "<missing>"
                if got != want:
                    raise LoadError(f"{path}: column {i + 1} is '{got}', expected '{want}'")
            raise LoadError(f"{path}: {len(header)} columns, expected {len(SCHEMA)}")
        rows = []
        for lineno, cells in enumerate(reader, start=2):
            if len(cells) != len(SCHEMA):
                raise LoadError(f"{path}: line {lineno} has {len(cells)} cells")
            try:
                rows.append([float(c) for c in cells])
            except ValueError:
                bad = next(c for c in cells if not _is_number(c))
                col = SCHEMA[cells.index(bad)]
                raise LoadError(f"{path}: line {lineno}, column '{col}': {bad!r}") from None
    if len(rows) < 2:
        raise LoadError(f"{path}: {len(rows)} data rows, need at least 2")
    data = np.asarray(rows)
    return TrajectoryTable(
        path=str(path),
        t=data[:, 0],
        x1=data[:, 1],
        x2=data[:, 2],
        u=data[:, 3],
        v=data[:, 4],
        region=data[:, 5].astype(int),
        set_distance=data[:, 6],
        warp_gain=data[:, 7],
    )


def _is_number(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False
