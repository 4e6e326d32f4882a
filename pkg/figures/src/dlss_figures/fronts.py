"""Front-propagation snapshots: overview row plus tip-zoom row.

Consumes one trajectory.csv per alpha (time-colored snapshots of the bump
evolution); the second row zooms toward the right tip of the support,
where the profiles steepen with growing alpha. SVG output embeds the
manifest hash of each run directory.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .data import DataError, manifest_hash, read_trajectory

__all__ = ["plot_fronts", "main"]


def _tip_window(states, floor=1e-6):
    """x-window around the right edge of the final support."""
    final = states[-1]
    n = final.size
    x = (np.arange(n) + 0.5) / n
    support = np.where(final > floor * np.max(final))[0]
    right = x[support[-1]] if support.size else 0.75
    lo, hi = right - 0.08, min(right + 0.04, 1.0)
    return lo, hi


def plot_fronts(run_dirs, output: Path) -> Path:
    runs = []
    digests = []
    for run_dir in run_dirs:
        run_dir = Path(run_dir)
        times, states = read_trajectory(run_dir / "trajectory.csv")
        digests.append(manifest_hash(run_dir))
        runs.append((run_dir.name, times, states))

    ncols = len(runs)
    fig, axes = plt.subplots(2, ncols, figsize=(3.8 * ncols, 5.2), squeeze=False)
    cmap = plt.get_cmap("viridis")
    for col, (name, times, states) in enumerate(runs):
        n = states[0].size
        x = (np.arange(n) + 0.5) / n
        tspan = max(times[-1] - times[0], 1e-300)
        for t, c in zip(times, states):
            color = cmap(0.15 + 0.8 * (t - times[0]) / tspan)
            axes[0, col].plot(x, c, color=color, lw=0.9)
            axes[1, col].plot(x, c, color=color, lw=0.9)
        axes[0, col].set_title(name, fontsize=10)
        axes[0, col].set_xlabel("x", fontsize=8)
        axes[0, col].set_ylabel("c", fontsize=8)
        lo, hi = _tip_window(states)
        tip_max = max(np.max(c[(x >= lo) & (x <= hi)]) for c in states)
        axes[1, col].set_xlim(lo, hi)
        axes[1, col].set_ylim(-0.02 * tip_max, 1.05 * tip_max)
        axes[1, col].set_xlabel("x (tip zoom)", fontsize=8)
        for ax in (axes[0, col], axes[1, col]):
            ax.tick_params(labelsize=7)
    fig.tight_layout()
    output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(
        output,
        format="svg",
        metadata={"Keywords": ";".join(f"manifest-sha256={d}" for d in digests)},
    )
    plt.close(fig)
    return output


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Render front-propagation snapshots with tip zooms")
    parser.add_argument(
        "--input-dir", required=True,
        help="directory whose subdirectories each hold trajectory.csv + manifest.json",
    )
    parser.add_argument("--output-dir", required=True)
    args = parser.parse_args(argv)
    indir = Path(args.input_dir)
    run_dirs = sorted(d for d in indir.iterdir() if (d / "trajectory.csv").is_file()) if indir.is_dir() else []
    try:
        if not run_dirs:
            raise DataError(f"no run directories with trajectory.csv under {indir}")
        out = plot_fronts(run_dirs, Path(args.output_dir) / "fronts.svg")
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
