"""Figure rendering for dlss-alpha solver output.

Two script entry points, both taking --input-dir/--output-dir:

  dlss-figures-profiles   similarity-profile panel grid from profile CSVs
  dlss-figures-fronts     front-propagation overview + tip zooms from
                          trajectory CSVs

Figures are generated purely from the CSVs and manifests; no solver
quantities are recomputed, and every SVG embeds the sha256 of the manifest
it was rendered from.
"""

from .data import DataError, FigureSpec, manifest_hash, read_csv_table, read_profile, read_trajectory
from .fronts import plot_fronts
from .profiles import plot_profiles

__all__ = [
    "DataError",
    "FigureSpec",
    "manifest_hash",
    "read_csv_table",
    "read_profile",
    "read_trajectory",
    "plot_fronts",
    "plot_profiles",
]
