"""Discrete periodic grid: states, difference operators, norms, inverse Laplacian.

The grid is the N-point torus with cells indexed cyclically (c_0 = c_N).
All operators act at the mesh scale N:

    forward_diff(f)  = N (f_+ - f)
    backward_diff(f) = N (f - f_-)
    laplacian(f)     = N^2 (f_- - 2 f + f_+)

so that laplacian == forward_diff o backward_diff exactly, and the summation
by parts <laplacian(phi), psi> = -<backward_diff(phi), backward_diff(psi)>
holds in the normalized inner product <v, w> = (1/N) sum v_k w_k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solveh_banded

__all__ = [
    "GridState",
    "inner_product",
    "forward_diff",
    "backward_diff",
    "laplacian",
    "lp_norm",
    "inv_laplacian",
]


def _as_vector(f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.ndim != 1 or f.size == 0:
        raise ValueError("grid functions are nonempty 1-D vectors")
    return f


@dataclass(frozen=True)
class GridState:
    """Nonnegative density vector on the N-point periodic grid.

    `probability()` additionally checks the normalization mean(values) = 1
    that defines the discrete probability densities.
    """

    values: np.ndarray

    def __post_init__(self):
        v = _as_vector(self.values)
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("density values must be finite and >= 0")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def mass(self) -> float:
        """Mean density (1/N) sum c_k, the conserved quantity."""
        return float(np.mean(self.values))

    def is_positive(self) -> bool:
        return bool(np.all(self.values > 0))

    @classmethod
    def probability(cls, values, tol: float = 1e-9) -> "GridState":
        state = cls(values)
        if abs(state.mass - 1.0) > tol:
            raise ValueError(f"not a probability state: mean = {state.mass!r}")
        return state


def inner_product(v, w) -> float:
    """Normalized inner product <v, w> = (1/N) sum_k v_k w_k."""
    v, w = _as_vector(v), _as_vector(w)
    if v.size != w.size:
        raise ValueError(f"length mismatch: {v.size} != {w.size}")
    return float(np.dot(v, w) / v.size)


def forward_diff(f) -> np.ndarray:
    """N (f_{k+1} - f_k), cyclic."""
    f = _as_vector(f)
    return f.size * (np.roll(f, -1) - f)


def backward_diff(f) -> np.ndarray:
    """N (f_k - f_{k-1}), cyclic."""
    f = _as_vector(f)
    return f.size * (f - np.roll(f, 1))


def laplacian(f) -> np.ndarray:
    """N^2 (f_{k-1} - 2 f_k + f_{k+1}), cyclic.

    Evaluated as the literal composition, so the stencil identity
    laplacian == forward_diff o backward_diff == backward_diff o forward_diff
    holds bit-exactly (both compositions round identically).
    """
    return forward_diff(backward_diff(f))


def lp_norm(f, p: float) -> float:
    """Discrete L^p norm ((1/N) sum |f_k|^p)^(1/p), p >= 1."""
    f = _as_vector(f)
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if np.isinf(p):
        return float(np.max(np.abs(f)))
    return float((np.mean(np.abs(f) ** p)) ** (1.0 / p))


def inv_laplacian(f, tol: float = 1e-10) -> np.ndarray:
    """Solve laplacian(g) = f for the mean-zero g; f must have mean zero.

    The periodic problem is rank-one deficient, so one node is pinned
    (g_0 = 0), the remaining definite tridiagonal system is solved by a
    banded Cholesky factorization in O(N), and the mean is subtracted
    afterwards. Inputs whose mean exceeds tol * max|f| are rejected rather
    than projected, to surface continuity-equation bugs in callers.
    """
    f = _as_vector(f)
    n = f.size
    scale = np.max(np.abs(f))
    mean = np.mean(f)
    if scale > 0 and abs(mean) > tol * scale:
        raise ValueError(f"input must have mean zero: mean = {mean!r}")
    if scale == 0.0:
        return np.zeros(n)
    if n < 3:
        raise ValueError("inverse Laplacian needs n >= 3")
    # Pinned system: unknowns g_1..g_{N-1}, matrix = N^2 * tridiag(1, -2, 1)
    # (row 0 of the periodic operator holds automatically since sum f = 0).
    # Solve with the sign flipped to make it positive definite.
    rhs = -(f[1:] - mean) / n**2
    ab = np.empty((2, n - 1))
    ab[0, :] = -1.0  # superdiagonal (first entry ignored by LAPACK)
    ab[1, :] = 2.0
    g_rest = solveh_banded(ab, rhs, lower=False)
    g = np.empty(n)
    g[0] = 0.0
    g[1:] = g_rest
    return g - np.mean(g)
