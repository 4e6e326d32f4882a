"""Direct O(N) solver for cyclic banded systems (periodic stencil matrices).

A cyclic pentadiagonal matrix is split into its pure banded part plus a
rank-4 corner correction and solved with one LAPACK banded factorization and
the Woodbury identity. Diagonals use the cyclic convention
d[o][k] = M[k, (k+o) mod N] for offsets o = -2..2.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded

__all__ = ["solve_cyclic_pentadiagonal"]


def solve_cyclic_pentadiagonal(diags: dict, b: np.ndarray) -> np.ndarray:
    """Solve M x = b for cyclic pentadiagonal M given by offset diagonals."""
    b = np.asarray(b, dtype=float)
    n = b.size
    if n < 8:
        # dense fallback keeps tiny grids exact without corner bookkeeping
        m = np.zeros((n, n))
        for o in range(-2, 3):
            d = diags[o]
            for k in range(n):
                m[k, (k + o) % n] += d[k]
        return np.linalg.solve(m, b)

    d2, d1, d0, dm1, dm2 = diags[2], diags[1], diags[0], diags[-1], diags[-2]
    ab = np.zeros((5, n))
    ab[0, 2:] = d2[: n - 2]
    ab[1, 1:] = d1[: n - 1]
    ab[2, :] = d0
    ab[3, : n - 1] = dm1[1:]
    ab[4, : n - 2] = dm2[2:]

    # wrap entries: (0,n-2)=dm2[0], (0,n-1)=dm1[0], (1,n-1)=dm2[1],
    #               (n-2,0)=d2[n-2], (n-1,0)=d1[n-1], (n-1,1)=d2[n-1]
    u = np.zeros((n, 4))
    u[0, 0] = 1.0
    u[1, 1] = 1.0
    u[n - 2, 2] = 1.0
    u[n - 1, 3] = 1.0
    v = np.zeros((n, 4))
    v[n - 2, 0] = dm2[0]
    v[n - 1, 0] = dm1[0]
    v[n - 1, 1] = dm2[1]
    v[0, 2] = d2[n - 2]
    v[0, 3] = d1[n - 1]
    v[1, 3] = d2[n - 1]

    rhs = np.column_stack([b, u])
    sol = solve_banded((2, 2), ab, rhs)
    y, z = sol[:, 0], sol[:, 1:]
    cap = np.eye(4) + v.T @ z
    x = y - z @ np.linalg.solve(cap, v.T @ y)
    return x
