"""CSV writers/readers and the run manifest.

Schemas (version 1, floats written with 17 significant digits):

  trajectory.csv   t, k, c_k, J_k      (J is the implicit step flux that
                                        produced the state; zeros at t = 0)
  diagnostics.csv  t, energy, primal, slope, cum_dissipation, edb_residual,
                   mass, min_density
  profile.csv      y, phi              ('#'-prefixed metadata header lines)

Every output directory carries a manifest.json with the package version,
the full configuration echo, the sampling seed, and the quadrature choices,
sufficient to re-run bit-identically.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from . import __version__

__all__ = [
    "SCHEMA_VERSION",
    "write_trajectory_csv",
    "write_diagnostics_csv",
    "write_profile_csv",
    "write_manifest",
    "read_table_csv",
    "read_profile_csv",
]

SCHEMA_VERSION = 1
_FMT = "%.17g"


def _fmt(x) -> str:
    return _FMT % float(x)


def write_trajectory_csv(path, traj) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(f"# schema=trajectory v{SCHEMA_VERSION}\n")
        w = csv.writer(fh)
        w.writerow(["t", "k", "c_k", "J_k"])
        for i, (t, state) in enumerate(zip(traj.times, traj.states)):
            J = traj.fluxes[i - 1] if i > 0 else np.zeros_like(state)
            for k in range(state.size):
                w.writerow([_fmt(t), k, _fmt(state[k]), _fmt(J[k])])


def write_diagnostics_csv(path, traj) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(f"# schema=diagnostics v{SCHEMA_VERSION}\n")
        w = csv.writer(fh)
        w.writerow(
            ["t", "energy", "primal", "slope", "cum_dissipation", "edb_residual", "mass", "min_density"]
        )
        for d in traj.diagnostics:
            w.writerow(
                [_fmt(v) for v in (d.t, d.energy, d.primal, d.slope, d.cum_dissipation, d.edb_residual, d.mass, d.min_density)]
            )


def write_profile_csv(path, prof) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(f"# schema=profile v{SCHEMA_VERSION}\n")
        fh.write(f"# alpha={_fmt(prof.alpha)}\n")
        fh.write(f"# b_star={_fmt(prof.b_star)}\n")
        fh.write(f"# experimental={prof.experimental}\n")
        if prof.support_radius is not None:
            fh.write(f"# support_radius={_fmt(prof.support_radius)}\n")
        if prof.tail is not None:
            fh.write(
                f"# tail_exponent={_fmt(prof.tail.exponent)}\n"
                f"# tail_stderr={_fmt(prof.tail.stderr)}\n"
                f"# tail_curvature={_fmt(prof.tail.curvature)}\n"
                f"# tail_algebraic={prof.tail.algebraic}\n"
            )
        w = csv.writer(fh)
        w.writerow(["y", "phi"])
        for y, p in zip(prof.y_grid, prof.phi):
            w.writerow([_fmt(y), _fmt(p)])


def write_manifest(path, command: str, config: dict, seed: int, extra: dict | None = None) -> None:
    manifest = {
        "package": "dlss-alpha",
        "version": __version__,
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "seed": seed,
        "config": config,
        "quadrature": {
            "dissipation_in_time": "trapezoid-in-state, step flux frozen",
            "continuum_integrals": "composite Simpson with Richardson refinement to 1e-10",
        },
    }
    if extra:
        manifest.update(extra)
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")


def read_table_csv(path):
    """Read a schema'd CSV into (header_comments, column dict of arrays)."""
    comments, rows, header = [], [], None
    with Path(path).open() as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                comments.append(line[1:].strip())
            elif header is None:
                header = line.split(",")
            else:
                rows.append([float(v) for v in line.split(",")])
    if header is None or not rows:
        raise ValueError(f"no data in {path}")
    data = np.asarray(rows)
    return comments, {name: data[:, i] for i, name in enumerate(header)}


def read_profile_csv(path):
    comments, cols = read_table_csv(path)
    meta = {}
    for c in comments:
        if "=" in c:
            key, val = c.split("=", 1)
            meta[key.strip()] = val.strip()
    return meta, cols
