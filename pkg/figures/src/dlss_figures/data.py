"""Readers for the solver's CSV schemas and run manifests.

The figure scripts consume only files: trajectory.csv (t, k, c_k, J_k),
profile CSVs (y, phi with '#' metadata), and manifest.json. Every figure
embeds the sha256 of the manifest it was rendered from.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["FigureSpec", "read_csv_table", "read_profile", "read_trajectory", "manifest_hash"]


class DataError(ValueError):
    """Missing or schema-invalid input file."""


@dataclass(frozen=True)
class FigureSpec:
    """Input CSVs, layout, axis scales, and the output image path."""

    inputs: tuple
    output: Path
    ncols: int = 2
    logscale: bool = False
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for path in self.inputs:
            if not Path(path).is_file():
                raise DataError(f"input CSV does not exist: {path}")


def read_csv_table(path):
    """Parse a schema'd CSV into (meta dict from '#' lines, column arrays)."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    meta, rows, header = {}, [], None
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, val = body.split("=", 1)
                meta[key.strip()] = val.strip()
            continue
        if header is None:
            header = [h.strip() for h in line.split(",")]
            continue
        try:
            rows.append([float(v) for v in line.split(",")])
        except ValueError as exc:
            raise DataError(f"{path}: bad row {line!r}") from exc
    if header is None or not rows:
        raise DataError(f"{path}: no data rows")
    data = np.asarray(rows)
    if data.shape[1] != len(header):
        raise DataError(f"{path}: ragged rows")
    return meta, {name: data[:, i] for i, name in enumerate(header)}


def read_profile(path):
    """Profile CSV -> (meta, y, phi)."""
    meta, cols = read_csv_table(path)
    if set(cols) != {"y", "phi"}:
        raise DataError(f"{path}: expected columns y, phi, got {sorted(cols)}")
    return meta, cols["y"], cols["phi"]


def read_trajectory(path):
    """Trajectory CSV -> (times, list of density arrays)."""
    meta, cols = read_csv_table(path)
    required = {"t", "k", "c_k", "J_k"}
    if set(cols) != required:
        raise DataError(f"{path}: expected columns {sorted(required)}, got {sorted(cols)}")
    times = np.unique(cols["t"])
    states = []
    for t in times:
        sel = cols["t"] == t
        order = np.argsort(cols["k"][sel])
        states.append(cols["c_k"][sel][order])
    n = states[0].size
    if any(s.size != n for s in states):
        raise DataError(f"{path}: snapshots of unequal length")
    return times, states


def manifest_hash(run_dir) -> str:
    """sha256 of the run manifest; embedded in the figure metadata."""
    path = Path(run_dir) / "manifest.json"
    if not path.is_file():
        raise DataError(f"missing manifest: {path}")
    json.loads(path.read_text())  # must parse
    return hashlib.sha256(path.read_bytes()).hexdigest()
