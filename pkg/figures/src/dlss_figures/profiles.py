"""Similarity-profile panel grid from profile CSVs.

One panel per alpha, profiles normalized to phi(0) = 1, with the fitted
tail/support exponent annotated from the CSV metadata. Output is SVG with
the run-manifest hash embedded.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .data import DataError, FigureSpec, manifest_hash, read_profile

__all__ = ["plot_profiles", "main"]


def _panel_annotation(meta: dict) -> str:
    parts = []
    if "tail_exponent" in meta:
        parts.append(f"exponent {float(meta['tail_exponent']):.2f}")
    if "support_radius" in meta:
        parts.append(f"support {float(meta['support_radius']):.2f}")
    if meta.get("experimental", "False") == "True":
        parts.append("experimental")
    return ", ".join(parts)


def plot_profiles(spec: FigureSpec, run_dir) -> Path:
    digest = manifest_hash(run_dir)
    panels = []
    for path in spec.inputs:
        meta, y, phi = read_profile(path)
        panels.append((float(meta["alpha"]), meta, y, phi))
    panels.sort(key=lambda p: p[0])

    ncols = spec.ncols
    nrows = -(-len(panels) // ncols)
    fig, axes = plt.subplots(nrows, ncols, figsize=(3.6 * ncols, 2.6 * nrows), squeeze=False)
    for ax in axes.flat[len(panels):]:
        ax.set_axis_off()
    for ax, (alpha, meta, y, phi) in zip(axes.flat, panels):
        if spec.logscale:
            pos = (y > 0) & (phi > 0)
            ax.loglog(y[pos], phi[pos], lw=1.2)
        else:
            ax.plot(np.concatenate([-y[::-1], y]), np.concatenate([phi[::-1], phi]), lw=1.2)
        note = _panel_annotation(meta)
        ax.set_title(rf"$\alpha = {alpha:g}$" + (f"  ({note})" if note else ""), fontsize=9)
        ax.set_xlabel("y", fontsize=8)
        ax.set_ylabel(r"$\Phi$", fontsize=8)
        ax.tick_params(labelsize=7)
    fig.tight_layout()
    spec.output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.output, format="svg", metadata={"Keywords": f"manifest-sha256={digest}"})
    plt.close(fig)
    return spec.output


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Render the similarity-profile panel grid")
    parser.add_argument("--input-dir", required=True, help="directory with profile_alpha*.csv + manifest.json")
    parser.add_argument("--output-dir", required=True)
    parser.add_argument("--logscale", action="store_true", help="log-log tail panels")
    args = parser.parse_args(argv)
    indir = Path(args.input_dir)
    inputs = tuple(sorted(indir.glob("profile_alpha*.csv")))
    try:
        if not inputs:
            raise DataError(f"no profile CSVs under {indir}")
        name = "profiles_loglog.svg" if args.logscale else "profiles.svg"
        spec = FigureSpec(inputs=inputs, output=Path(args.output_dir) / name, logscale=args.logscale)
        out = plot_profiles(spec, indir)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
