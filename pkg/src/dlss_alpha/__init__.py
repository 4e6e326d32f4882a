"""Structure-preserving solver for the DLSS equation with power-law mobility.

The spatial discretization is the chemical reaction-rate system on the
N-point periodic grid,

    dc_k/dt = N^2 (J_{k-1} - 2 J_k + J_{k+1}),
    J_k     = sigma_alpha(c_{k-1}, c_k, c_{k+1}) N^2 (c_k^2 - c_{k-1} c_{k+1}),

integrated in time by implicit Euler with a damped Newton method. The
package also ships the full variational diagnostics layer (entropy, cosh
dissipation potentials, slope, energy-dissipation balance), the
discrete-to-continuum embedding tools, and closed-form traveling-front /
self-similar profile oracles used for validation.
"""

__version__ = "0.1.0"

from .grid import GridState, backward_diff, forward_diff, inner_product, inv_laplacian, laplacian, lp_norm
from .kinetics import ActivitySpec, activity, check_admissibility, flux, jbar, mobility, rhs, stolarsky_mean
from .variational import (
    DiagnosticsRecord,
    cosh_primal,
    cosh_star,
    dual_dissipation,
    edb_functional,
    entropy,
    perspective,
    primal_dissipation,
    slope,
)
from .integrator import SolverConfig, SolverError, Trajectory, jacobian, solve, step

__all__ = [name for name in dir() if not name.startswith("_")]
