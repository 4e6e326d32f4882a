"""Initial-data presets for solver runs."""

from __future__ import annotations

import numpy as np

__all__ = ["uniform", "bump", "perturbed_uniform", "from_csv", "cell_averages", "make_initial"]


def uniform(n: int) -> np.ndarray:
    return np.ones(n)


def bump(n: int, ell: float = 0.1) -> np.ndarray:
    """c0_k = max(0, 1 - ((N/2 - k)/(ell N))^2), the figure-run bump.

    Kept unnormalized (mean ~ 4 ell / 3); mass conservation is always
    measured against the run's own initial mean.
    """
    k = np.arange(n)
    return np.maximum(0.0, 1.0 - ((n / 2 - k) / (ell * n)) ** 2)


def perturbed_uniform(n: int, amplitude: float = 0.3, mode: int = 1) -> np.ndarray:
    """1 + a sin(2 pi m x_k) sampled at cell midpoints; exact unit mean."""
    if not 0 <= amplitude < 1:
        raise ValueError("amplitude must lie in [0, 1) to keep the state positive")
    x = (np.arange(n) + 0.5) / n
    return 1.0 + amplitude * np.sin(2 * np.pi * mode * x)


def from_csv(path) -> np.ndarray:
    """Read a k,c_k table (comments with '#')."""
    data = np.loadtxt(path, delimiter=",", comments="#")
    if data.ndim == 1:
        return data.astype(float)
    return data[np.argsort(data[:, 0]), 1].astype(float)


def cell_averages(rho0, n: int) -> np.ndarray:
    """Exact cell averages of a continuum profile (refinement studies)."""
    from .continuum import embed_dual

    return embed_dual(rho0, n)


def make_initial(preset: str, n: int, **kw) -> np.ndarray:
    if preset == "uniform":
        return uniform(n)
    if preset == "bump":
        return bump(n, ell=float(kw.get("ell", 0.1)))
    if preset == "perturbed-uniform":
        return perturbed_uniform(n, amplitude=float(kw.get("amplitude", 0.3)), mode=int(kw.get("mode", 1)))
    if preset == "custom-csv":
        return from_csv(kw["path"])
    raise ValueError(f"unknown initial preset {preset!r}")
