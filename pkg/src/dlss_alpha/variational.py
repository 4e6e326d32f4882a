"""Discrete gradient-structure functionals: entropy, cosh potentials, slope, EDB.

The dissipation geometry is the cosh pair

    C*(r) = 4 (cosh(r/2) - 1),        C(s) = 2 s arsinh(s/2) - 4 (sqrt(1 + s^2/4) - 1),

Legendre duals of each other with C*'(r) = 2 sinh(r/2), C'(s) = 2 arsinh(s/2),
together with the perspective function Cbar(s | w) = w C(s/w) (0 at (0,0),
+inf for s != 0, w = 0). For a density c and flux J on the N-torus:

    primal_dissipation  R(c, J)   = (1/N) sum Cbar(N^2 J_k | N^4 m_k)
    dual_dissipation    R*(c, xi) = (1/N) sum N^4 m_k C*(xi_k / N^2)
    slope               S(c)      = (1/N) sum 2 N^4 sigma_k (c_k - sqrt(c_{k-1} c_{k+1}))^2
                                  = R*(c, -laplacian(log c))  on positive states

and the energy-dissipation residual of a trajectory is
L = E(c(T)) - E(c(0)) + integral of (R + S) dt, which vanishes for exact
solutions of the reaction-rate system.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kinetics
from .grid import backward_diff, forward_diff, laplacian

__all__ = [
    "DiagnosticsRecord",
    "entropy",
    "cosh_star",
    "cosh_star_prime",
    "cosh_primal",
    "cosh_primal_prime",
    "perspective",
    "primal_dissipation",
    "dual_dissipation",
    "slope",
    "slope_spatial_lower_bound",
    "slope_bound_certificate",
    "dissipation_step",
    "edb_functional",
]


@dataclass(frozen=True)
class DiagnosticsRecord:
    """Per-time scalars recorded along a solver run.

    `primal` is R evaluated against the flux of the step that produced the
    state (0 at t = 0); `cum_dissipation` is the running time quadrature of
    R + S and `edb_residual` the running energy-dissipation balance
    E(t) - E(0) + cum_dissipation.
    """

    t: float
    energy: float
    primal: float
    slope: float
    mass: float
    min_density: float
    cum_dissipation: float
    edb_residual: float


def entropy(c) -> float:
    """E(c) = (1/N) sum (c_k log c_k - c_k + 1), with 0 log 0 = 0. >= 0.

    Evaluated exactly as the continuum entropy of the piecewise-constant
    embedding, so the embedding identity holds bit-exactly.
    """
    c = np.asarray(c, dtype=float)
    if np.any(c < 0):
        raise ValueError("entropy requires a nonnegative density")
    return float(np.mean(entropy_integrand(c)))


def entropy_integrand(r: np.ndarray) -> np.ndarray:
    """x log x - x + 1 with the 0 log 0 = 0 convention (shared evaluation)."""
    r = np.asarray(r, dtype=float)
    safe = np.where(r > 0, r, 1.0)
    return safe * np.log(safe) - r + 1.0


def cosh_star(r):
    """C*(r) = 4 (cosh(r/2) - 1) = 8 sinh(r/4)^2; even, convex, C*(0) = 0."""
    r = np.asarray(r, dtype=float)
    out = 8.0 * np.sinh(r / 4.0) ** 2
    return float(out) if out.ndim == 0 else out


def cosh_star_prime(r):
    """C*'(r) = 2 sinh(r/2)."""
    r = np.asarray(r, dtype=float)
    out = 2.0 * np.sinh(r / 2.0)
    return float(out) if out.ndim == 0 else out


def cosh_primal(s):
    """C(s) = 2 s arsinh(s/2) - 4 (sqrt(1 + s^2/4) - 1), the dual of C*."""
    s = np.asarray(s, dtype=float)
    scalar = s.ndim == 0
    s = np.atleast_1d(s)
    a = np.abs(s)
    root_m1 = np.empty_like(a)
    big = a > 1e150  # sqrt(1 + s^2/4) ~ |s|/2 + 1/|s| beyond sqrt overflow
    root_m1[big] = 0.5 * a[big] + 1.0 / a[big] - 1.0
    u = 0.25 * a[~big] ** 2
    root_m1[~big] = u / (np.sqrt(1.0 + u) + 1.0)
    out = 2.0 * s * np.arcsinh(0.5 * s) - 4.0 * root_m1
    return float(out[0]) if scalar else out


def cosh_primal_prime(s):
    """C'(s) = 2 arsinh(s/2) = (C*')^{-1}(s)."""
    s = np.asarray(s, dtype=float)
    out = 2.0 * np.arcsinh(0.5 * s)
    return float(out) if out.ndim == 0 else out


def perspective(s, w):
    """Perspective Cbar(s | w): w C(s/w) for w > 0, 0 at s = w = 0, else +inf.

    Jointly convex; lambda -> Cbar(lambda s | lambda^2 w) is increasing. The
    quotient s/w is evaluated in log space once it exceeds 1e150, using
    C(u) ~ 2 u log u - 2 u + 4.
    """
    s = np.asarray(s, dtype=float)
    w = np.asarray(w, dtype=float)
    if np.any(w < 0):
        raise ValueError("perspective weight must be >= 0")
    s, w = np.broadcast_arrays(s, w)
    scalar = s.ndim == 0
    s, w = np.atleast_1d(s), np.atleast_1d(w)
    out = np.empty(s.shape)
    zero_w = w == 0.0
    out[zero_w] = np.where(s[zero_w] == 0.0, 0.0, np.inf)
    pw = ~zero_w
    if np.any(pw):
        sp, wp = s[pw], w[pw]
        ap = np.abs(sp)
        with np.errstate(over="ignore", invalid="ignore"):
            u = ap / wp
        asympt = u > 1e150
        val = np.empty_like(sp)
        direct = ~asympt
        val[direct] = wp[direct] * cosh_primal(np.abs(sp[direct]) / wp[direct])
        if np.any(asympt):
            aa, ww = ap[asympt], wp[asympt]
            val[asympt] = 2.0 * aa * (np.log(aa) - np.log(ww)) - 2.0 * aa + 4.0 * ww
        out[pw] = val
    return float(out[0]) if scalar else out


def _mobility_field(spec, c: np.ndarray) -> np.ndarray:
    return kinetics.mobility(spec, c, kinetics.geometric_neighbor_mean(c))


def primal_dissipation(spec, c, J) -> float:
    """R(c, J) = (1/N) sum Cbar(N^2 J_k | N^4 m_k); +inf where J flows
    against vanishing mobility."""
    c = np.asarray(c, dtype=float)
    J = np.asarray(J, dtype=float)
    n = c.size
    m = _mobility_field(spec, c)
    return float(np.mean(perspective(n**2 * J, n**4 * m)))


def dual_dissipation(spec, c, xi) -> float:
    """R*(c, xi) = (1/N) sum N^4 m_k C*(xi_k / N^2); convex in xi."""
    c = np.asarray(c, dtype=float)
    xi = np.asarray(xi, dtype=float)
    n = c.size
    m = _mobility_field(spec, c)
    # m = 0 kills the summand regardless of xi (0 * C* convention)
    vals = np.zeros(n)
    pos = m > 0
    vals[pos] = n**4 * m[pos] * cosh_star(xi[pos] / n**2)
    return float(np.mean(vals))


def slope(spec, c) -> float:
    """S(c) = (1/N) sum 2 N^4 sigma_k (c_k - sqrt(c_{k-1} c_{k+1}))^2.

    Continuous extension of R*(c, -laplacian(log c)) to nonnegative states,
    via sqrt(ab) C*(log a - log b) = 2 (sqrt(a) - sqrt(b))^2.
    """
    c = np.asarray(c, dtype=float)
    if np.any(c < 0):
        raise ValueError("slope requires a nonnegative density")
    n = c.size
    return float(np.mean(2.0 * n**4 * kinetics.sbar(spec, c, kinetics.geometric_neighbor_mean(c))))


def slope_spatial_lower_bound(c, alpha: float) -> float:
    """(1/(24 alpha^2)) (1/N) sum [ (lap c^(a/2))^2 + (d- c^(a/4))^4 + (d+ c^(a/4))^4 ].

    Lower bound for the slope of any admissible activity (the discrete
    spatial-regularity estimate)."""
    c = np.asarray(c, dtype=float)
    w = c ** (alpha / 2.0)
    u = c ** (alpha / 4.0)
    total = np.mean(laplacian(w) ** 2 + backward_diff(u) ** 4 + forward_diff(u) ** 4)
    return float(total / (24.0 * alpha**2))


def slope_bound_certificate(x, t):
    """Quartic certificate 15 t^2 + 2 t (x-11)(x-1) + (x-1)^2 (3 + 22 x + 15 x^2).

    Nonnegative for x >= 0, 0 <= t <= x^2; underpins the spatial-regularity
    lower bound."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    out = 15.0 * t**2 + 2.0 * t * (x - 11.0) * (x - 1.0) + (x - 1.0) ** 2 * (3.0 + 22.0 * x + 15.0 * x**2)
    return float(out) if out.ndim == 0 else out


def dissipation_step(spec, c_from, c_to, J_step, dt: float) -> float:
    """Quadrature of (R + S) over one implicit step with flux held constant.

    Trapezoid in the states; if R at the departing state is infinite (flux
    against zero mobility, possible only when leaving a degenerate state),
    the step falls back to the right-endpoint rectangle, which is finite for
    implicit Euler.
    """
    r_to = primal_dissipation(spec, c_to, J_step)
    r_from = primal_dissipation(spec, c_from, J_step)
    r_part = r_to if np.isinf(r_from) else 0.5 * (r_from + r_to)
    s_part = 0.5 * (slope(spec, c_from) + slope(spec, c_to))
    return dt * (r_part + s_part)


def edb_functional(spec, trajectory) -> float:
    """L = E(c(T)) - E(c(0)) + sum of per-step dissipation quadratures.

    Requires the trajectory to carry every solver step (record_every == 1);
    ~0 (O(dt)) for solver output, > 0 for any other flux assignment.
    """
    states = trajectory.states
    times = trajectory.times
    fluxes = trajectory.fluxes
    if len(states) < 2:
        raise ValueError("trajectory must contain at least two states")
    if len(fluxes) != len(states) - 1:
        raise ValueError("need one step flux per state pair")
    if trajectory.meta.get("record_every", 1) != 1:
        raise ValueError("energy-dissipation functional needs every step recorded")
    d_total = 0.0
    for i in range(len(states) - 1):
        d_total += dissipation_step(spec, states[i], states[i + 1], fluxes[i], times[i + 1] - times[i])
    return entropy(states[-1]) - entropy(states[0]) + d_total
