"""Discrete-to-continuum embeddings and continuous functionals on the torus.

Densities embed as piecewise constants (norm-preserving), dual test functions
as cell averages, and fluxes through the inverse Laplacian of the embedded
discrete Laplacian, realized exactly as a C^1 piecewise quadratic. Continuous
energy/dissipation functionals and the four equivalent forms of the relaxed
slope

    (a)  (2/a^2) int (lap r^(a/2) - 4 (dx r^(a/4))^2)^2
    (b)  (2/a^2) int ((lap r^(a/2))^2 + 16/3 (dx r^(a/4))^4)
    (bb) (2/a^2) int (r^(a/2) lap r^(a/2) - (dx r^(a/2))^2)^2 / r^a
    (c)  1/2 int ((lap r)^2 / r^(2-a) + (2a-3)/3 (dx r)^4 / r^(4-a))

are evaluated by composite Simpson quadrature with Richardson refinement.
The relaxed slope is defined for smooth positive profiles; solver output is
first interpolated by a periodic cubic spline (documented smoothing).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from . import variational
from .grid import laplacian, lp_norm
from .kinetics import ActivitySpec

__all__ = [
    "PiecewiseConstantDensity",
    "PiecewiseQuadraticField",
    "SmoothDensity",
    "embed_density",
    "embed_dual",
    "embed_flux",
    "continuous_entropy",
    "continuous_primal",
    "continuous_dual",
    "relaxed_slope",
    "slope_reference",
    "modified_flux_slope",
    "periodic_quadrature",
    "refinement_study",
]


def periodic_quadrature(f, tol: float = 1e-10, n0: int = 32, max_doublings: int = 16) -> float:
    """Composite Simpson on [0,1] with Richardson refinement to `tol`."""

    def simpson(n):
        x = np.linspace(0.0, 1.0, n + 1)
        y = np.asarray(f(x), dtype=float)
        h = 1.0 / n
        return h / 3.0 * (y[0] + y[-1] + 4 * np.sum(y[1:-1:2]) + 2 * np.sum(y[2:-2:2]))

    n = n0
    s_prev = simpson(n)
    for _ in range(max_doublings):
        n *= 2
        s_next = simpson(n)
        err = abs(s_next - s_prev) / 15.0
        if err <= tol * max(1.0, abs(s_next)):
            return s_next + (s_next - s_prev) / 15.0
        s_prev = s_next
    raise RuntimeError(f"quadrature did not reach tol {tol}")


@dataclass(frozen=True)
class PiecewiseConstantDensity:
    """Cell values on [k/N, (k+1)/N); the image of the density embedding."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    @property
    def n(self) -> int:
        return self.values.size

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.minimum((np.mod(x, 1.0) * self.n).astype(int), self.n - 1)
        return self.values[idx]

    def integral(self) -> float:
        return float(np.mean(self.values))

    def lp_norm(self, p: float) -> float:
        """L^p(T) norm; equals the discrete L^p_N norm exactly."""
        return lp_norm(self.values, p)


def embed_density(c) -> PiecewiseConstantDensity:
    """Piecewise-constant embedding of a grid density (norm-preserving)."""
    return PiecewiseConstantDensity(np.asarray(c, dtype=float))


def embed_dual(phi, n: int, tol: float = 1e-12) -> np.ndarray:
    """Cell averages (iota* phi)_k = N int_{k/N}^{(k+1)/N} phi, by adaptive
    quadrature to `tol`; the adjoint of the density embedding."""
    out = np.empty(n)
    for k in range(n):
        val, err = quad(phi, k / n, (k + 1) / n, epsabs=tol / n, epsrel=tol, limit=200)
        if err > 10 * max(tol / n, tol * abs(val)):
            raise RuntimeError(f"cell quadrature failure at cell {k}: err = {err}")
        out[k] = n * val
    return out


@dataclass(frozen=True)
class PiecewiseQuadraticField:
    """C^1 periodic piecewise quadratic u with u'' = g piecewise constant.

    Exact representation of the flux embedding: u = inv_laplacian of the
    embedded (mean-zero) discrete Laplacian of the flux, mean-normalized.
    Per cell k (local coordinate s in [0, h], h = 1/N):
    u(s) = a_k + b_k s + g_k s^2 / 2.
    """

    a: np.ndarray
    b: np.ndarray
    g: np.ndarray

    @property
    def n(self) -> int:
        return self.a.size

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        xm = np.mod(x, 1.0)
        idx = np.minimum((xm * self.n).astype(int), self.n - 1)
        s = xm - idx / self.n
        return self.a[idx] + self.b[idx] * s + 0.5 * self.g[idx] * s * s

    def l1_norm(self) -> float:
        """Exact integral of |u|: per-cell quadratic antiderivatives split at
        interior roots."""
        h = 1.0 / self.n
        total = 0.0
        for a, b, g in zip(self.a, self.b, self.g):
            pts = [0.0, h]
            if g != 0.0:
                disc = b * b - 2.0 * g * a
                if disc > 0:
                    r = np.sqrt(disc)
                    for root in ((-b - r) / g, (-b + r) / g):
                        if 0.0 < root < h:
                            pts.append(root)
            elif b != 0.0:
                root = -a / b
                if 0.0 < root < h:
                    pts.append(root)
            pts = sorted(pts)

            def anti(s):
                return a * s + 0.5 * b * s * s + g * s**3 / 6.0

            # the quadratic has one sign between consecutive split points
            for lo, hi in zip(pts[:-1], pts[1:]):
                total += abs(anti(hi) - anti(lo))
        return float(total)


def embed_flux(J) -> PiecewiseQuadraticField:
    """Flux embedding: solve u'' = iota(laplacian(J)) on the torus, u periodic
    with zero mean, exactly (piecewise quadratic).

    laplacian(J) has exact zero sum, so the problem is solvable; the
    embedding only sees laplacian(J), hence is blind to the flux mean (the
    dropped mean is the caller's bookkeeping).
    """
    J = np.asarray(J, dtype=float)
    n = J.size
    h = 1.0 / n
    g = laplacian(J)
    g = g - g.mean()  # remove roundoff-level mean so u' closes periodically
    # slopes at cell left edges, up to the additive constant fixed by
    # int_0^1 u' = 0 (periodicity of u)
    p = np.concatenate(([0.0], np.cumsum(g[:-1] * h)))
    const = -np.sum(p * h + 0.5 * g * h * h)
    b = p + const
    # left-edge values from u_0 = 0, then mean normalization
    increments = b * h + 0.5 * g * h * h
    a = np.concatenate(([0.0], np.cumsum(increments[:-1])))
    mean_u = np.sum(a * h + 0.5 * b * h * h + g * h**3 / 6.0)
    a = a - mean_u
    return PiecewiseQuadraticField(a, b, g)


@dataclass(frozen=True)
class SmoothDensity:
    """Positive profile with first and second derivatives on the torus.

    Built either from analytic callables or by periodic cubic-spline
    interpolation of solver output at cell midpoints (the documented
    smoothing for evaluating the relaxed slope on discrete states).
    """

    f: object
    df: object
    ddf: object

    def __call__(self, x):
        return self.f(np.asarray(x, dtype=float))

    @classmethod
    def from_callables(cls, f, df, ddf) -> "SmoothDensity":
        return cls(f, df, ddf)

    @classmethod
    def from_grid(cls, c) -> "SmoothDensity":
        c = np.asarray(c, dtype=float)
        n = c.size
        x = (np.arange(n + 1) + 0.5) / n
        y = np.concatenate([c, c[:1]])
        sp = CubicSpline(x, y, bc_type="periodic")

        def wrap(x):  # spline knots live on [0.5/n, 1+0.5/n]
            return np.mod(np.asarray(x, dtype=float) - 0.5 / n, 1.0) + 0.5 / n

        return cls(
            lambda t: sp(wrap(t)),
            lambda t: sp(wrap(t), 1),
            lambda t: sp(wrap(t), 2),
        )


def continuous_entropy(rho, tol: float = 1e-10) -> float:
    """E(rho) = int (rho log rho - rho + 1); exact (cell sums) for piecewise
    constants, quadrature otherwise."""
    if isinstance(rho, PiecewiseConstantDensity):
        return float(np.mean(variational.entropy_integrand(rho.values)))
    return periodic_quadrature(lambda x: variational.entropy_integrand(rho(x)), tol)


def continuous_primal(rho, j, alpha: float, tol: float = 1e-10) -> float:
    """R_alpha(rho, j) = 1/2 int j^2 / rho^alpha; +inf if j flows where rho
    vanishes (piecewise-constant case)."""
    if isinstance(rho, PiecewiseConstantDensity) and isinstance(j, PiecewiseConstantDensity):
        r, jj = rho.values, j.values
        if np.any((r == 0) & (jj != 0)):
            return np.inf
        vals = np.zeros_like(r)
        mask = r > 0
        vals[mask] = jj[mask] ** 2 / r[mask] ** alpha
        return float(0.5 * np.mean(vals))
    return periodic_quadrature(lambda x: 0.5 * np.asarray(j(x)) ** 2 / np.asarray(rho(x)) ** alpha, tol)


def continuous_dual(rho, eta, alpha: float, tol: float = 1e-10) -> float:
    """R*_alpha(rho, eta) = 1/2 int rho^alpha eta^2."""
    if isinstance(rho, PiecewiseConstantDensity) and isinstance(eta, PiecewiseConstantDensity):
        return float(0.5 * np.mean(rho.values**alpha * eta.values**2))
    return periodic_quadrature(lambda x: 0.5 * np.asarray(rho(x)) ** alpha * np.asarray(eta(x)) ** 2, tol)


def _slope_integrand(rho: SmoothDensity, alpha: float, form: str):
    a = alpha

    def values(x):
        r = np.asarray(rho.f(x), dtype=float)
        r1 = np.asarray(rho.df(x), dtype=float)
        r2 = np.asarray(rho.ddf(x), dtype=float)
        if np.any(r <= 0):
            raise ValueError("relaxed slope needs a strictly positive profile")
        if form == "a":
            lap_half = (a / 2) * r ** (a / 2 - 1) * r2 + (a / 2) * (a / 2 - 1) * r ** (a / 2 - 2) * r1**2
            dx_quarter = (a / 4) * r ** (a / 4 - 1) * r1
            return (2.0 / a**2) * (lap_half - 4.0 * dx_quarter**2) ** 2
        if form == "b":
            lap_half = (a / 2) * r ** (a / 2 - 1) * r2 + (a / 2) * (a / 2 - 1) * r ** (a / 2 - 2) * r1**2
            dx_quarter = (a / 4) * r ** (a / 4 - 1) * r1
            return (2.0 / a**2) * (lap_half**2 + (16.0 / 3.0) * dx_quarter**4)
        if form == "bb":
            lap_half = (a / 2) * r ** (a / 2 - 1) * r2 + (a / 2) * (a / 2 - 1) * r ** (a / 2 - 2) * r1**2
            dx_half = (a / 2) * r ** (a / 2 - 1) * r1
            return (2.0 / a**2) * (r ** (a / 2) * lap_half - dx_half**2) ** 2 / r**a
        if form == "c":
            return 0.5 * (r2**2 / r ** (2.0 - a) + (2.0 * a - 3.0) / 3.0 * r1**4 / r ** (4.0 - a))
        raise ValueError(f"unknown slope form {form!r}")

    return values


def relaxed_slope(rho: SmoothDensity, alpha: float, form: str = "a", tol: float = 1e-10) -> float:
    """One of the four equivalent forms of the relaxed slope on a smooth
    positive profile; all agree after integration by parts."""
    return periodic_quadrature(_slope_integrand(rho, alpha, form), tol)


def slope_reference(rho: SmoothDensity, alpha: float, tol: float = 1e-10) -> float:
    """1/2 int rho^alpha (lap log rho)^2, the unrelaxed positive-profile slope."""

    def values(x):
        r = np.asarray(rho.f(x), dtype=float)
        r1 = np.asarray(rho.df(x), dtype=float)
        r2 = np.asarray(rho.ddf(x), dtype=float)
        return 0.5 * r**alpha * (r2 / r - (r1 / r) ** 2) ** 2

    return periodic_quadrature(values, tol)


def modified_flux_slope(rho: SmoothDensity, j, alpha: float, x):
    """Pointwise modified flux V = rho^(-a/2) j and modified slope
    Sigma = -(2/a)(lap rho^(a/2) - 4 (dx rho^(a/4))^2) on the sample grid x.

    The space-time dissipation equals (1/2)||V||^2 + (1/2)||Sigma||^2, and
    EDB solutions satisfy V = Sigma pointwise.
    """
    x = np.asarray(x, dtype=float)
    r = np.asarray(rho.f(x), dtype=float)
    if np.any(r <= 0):
        raise ValueError("modified flux/slope need a strictly positive profile")
    r1 = np.asarray(rho.df(x), dtype=float)
    r2 = np.asarray(rho.ddf(x), dtype=float)
    a = alpha
    jv = np.asarray(j(x), dtype=float)
    V = r ** (-a / 2) * jv
    lap_half = (a / 2) * r ** (a / 2 - 1) * r2 + (a / 2) * (a / 2 - 1) * r ** (a / 2 - 2) * r1**2
    dx_quarter = (a / 4) * r ** (a / 4 - 1) * r1
    Sigma = -(2.0 / a) * (lap_half - 4.0 * dx_quarter**2)
    return V, Sigma


def _restrict_pairwise(c_fine: np.ndarray) -> np.ndarray:
    """Cell-average restriction from grid 2N to grid N (exact adjoint pair)."""
    return 0.5 * (c_fine[0::2] + c_fine[1::2])


def refinement_study(spec: ActivitySpec, problem: dict, n_list) -> dict:
    """Run the same continuum initial profile at each N and tabulate the
    discrete-vs-embedded energies and dissipations plus L^1 self-convergence.

    problem keys: rho0 (callable), t_end, dt, optional record_every.
    Initial data are exact cell averages of rho0. Self-convergence compares
    c^N with the pairwise cell-average restriction of c^{2N} in L^1_N.
    """
    from .integrator import SolverConfig, solve  # local import to avoid cycle

    n_list = sorted(int(n) for n in n_list)
    rho0 = problem["rho0"]
    runs = {}
    rows = []
    for n in n_list:
        c0 = embed_dual(rho0, n)
        cfg = SolverConfig(
            t_end=problem["t_end"],
            dt=problem["dt"],
            record_every=problem.get("record_every", 1),
            newton_tol=problem.get("newton_tol", 1e-11),
        )
        traj = solve(spec, cfg, c0)
        runs[n] = traj
        c_T = traj.final_state
        e_disc = variational.entropy(c_T)
        e_emb = continuous_entropy(embed_density(c_T))
        d_disc = traj.diagnostics[-1].cum_dissipation
        d_emb = _embedded_dissipation(spec, traj)
        rows.append(
            {
                "n": n,
                "energy_discrete": e_disc,
                "energy_embedded": e_emb,
                "dissipation_discrete": d_disc,
                "dissipation_embedded": d_emb,
            }
        )
    diffs = {}
    for n in n_list:
        if 2 * n in runs:
            fine = _restrict_pairwise(runs[2 * n].final_state)
            diffs[n] = lp_norm(runs[n].final_state - fine, 1)
    for row in rows:
        n = row["n"]
        row["l1_diff_to_refined"] = diffs.get(n)
        row["l1_order"] = (
            float(np.log2(diffs[n] / diffs[2 * n])) if n in diffs and 2 * n in diffs else None
        )
    return {"alpha": spec.alpha, "family": spec.family, "rows": rows}


def _embedded_dissipation(spec: ActivitySpec, traj) -> float:
    """Continuum R_alpha + S_alpha along the embedded, smoothed run, with the
    same time quadrature the solver uses for D (trapezoid in the density with
    the step flux frozen over each recorded interval).

    Smoothing: periodic cubic spline through cell midpoints for the density
    (relaxed slope needs a Sobolev profile); exact piecewise-quadratic field
    for the flux.
    """
    alpha = spec.alpha
    smooth = [SmoothDensity.from_grid(c) for c in traj.states]
    slopes = [relaxed_slope(rho, alpha, form="a", tol=1e-8) for rho in smooth]

    def primal(rho, jfield):
        return periodic_quadrature(
            lambda x: 0.5 * jfield(x) ** 2 / np.maximum(rho(x), 1e-300) ** alpha, 1e-8
        )

    total = 0.0
    t = np.asarray(traj.times)
    for i in range(len(traj.states) - 1):
        # the embedding drops the flux mean (the discrete Laplacian is blind
        # to it); the dissipation sees the full flux, so add it back
        j_mean = float(np.mean(traj.fluxes[i]))
        field = embed_flux(traj.fluxes[i])
        jfield = lambda x: field(x) + j_mean
        r_part = 0.5 * (primal(smooth[i], jfield) + primal(smooth[i + 1], jfield))
        s_part = 0.5 * (slopes[i] + slopes[i + 1])
        total += (t[i + 1] - t[i]) * (r_part + s_part)
    return float(total)
