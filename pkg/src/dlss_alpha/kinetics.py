"""Stolarsky means, activity families, mobility, and the reaction-rate flux.

The local geometry of the scheme is the pair (x, y) = (c_k, sqrt(c_{k-1} c_{k+1})).
An activity family supplies sigma(x, y), homogeneous of degree alpha - 2, and
the flux is

    J_k = N^2 * jbar(c_k, sqrt(c_{k-1} c_{k+1})),   jbar(x, y) = sigma(x, y) (x^2 - y^2),

where jbar (not sigma itself) extends continuously to the boundary of the
positive quadrant. Families:

    stolarsky-power   s_alpha(x,y)^(2 alpha - 2) * 2 / (x^alpha + y^alpha)
                      (admissible for every alpha > 0)
    root-difference   (4/alpha^2) ((x^(a/2) - y^(a/2)) / (x - y))^2
                      == s_{alpha/2}(x,y)^(alpha - 2)      (used for figure runs)
    mrss              2 / (x + y)                          (alpha = 1 only)
    mass-action       1                                    (alpha = 2 only)

All degenerate x ~ y evaluations are funneled through `stolarsky_mean`, which
switches to a fourth-order series in t = (x-y)/(x+y) inside the relative
threshold `epsilon_diag`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import laplacian

__all__ = [
    "ActivitySpec",
    "stolarsky_mean",
    "activity",
    "jbar",
    "sbar",
    "mobility",
    "flux",
    "rhs",
    "geometric_neighbor_mean",
    "flux_jacobian_diagonals",
    "check_admissibility",
]

FAMILIES = ("stolarsky-power", "root-difference", "mrss", "mass-action")

# Below this distance from the exceptional exponents p = 0, 1 the closed-form
# logarithmic / identric limits replace the general power formula.
_P_EPS = 1e-9


@dataclass(frozen=True)
class ActivitySpec:
    """Activity family name + mobility exponent, with the series threshold.

    epsilon_diag is the relative width |x-y| <= epsilon_diag * max(x,y) of the
    series branch; the default 1e-4 keeps both the series truncation and the
    raw-formula cancellation below ~1e-12 relative.
    """

    alpha: float
    family: str = "stolarsky-power"
    epsilon_diag: float = 1e-4

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown activity family {self.family!r}")
        if not self.alpha > 0:
            raise ValueError("mobility exponent alpha must be > 0")
        if self.family == "mrss" and self.alpha != 1:
            raise ValueError("the mrss activity 2/(x+y) is the alpha = 1 scheme")
        if self.family == "mass-action" and self.alpha != 2:
            raise ValueError("mass-action kinetics is the alpha = 2 scheme")
        if not 0 < self.epsilon_diag < 1e-2:
            raise ValueError("epsilon_diag out of range")


def _prepare_pair(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < 0) or np.any(y < 0):
        raise ValueError("mean/activity arguments must be >= 0")
    scalar = x.ndim == 0 and y.ndim == 0
    x, y = np.atleast_1d(x), np.atleast_1d(y)
    x, y = np.broadcast_arrays(x, y)
    return x.astype(float), y.astype(float), scalar


def _series_coeffs(p: float):
    # s_p(x,y) = mu * (1 + qa t^2 + c4 t^4 + O(t^6)), mu = (x+y)/2, t = (x-y)/(x+y)
    qa = (p - 2.0) / 6.0
    c4 = (p - 2.0) * (p - 3.0) * (p - 4.0) / 120.0 - (p - 2.0) ** 3 / 72.0
    return qa, c4


def stolarsky_mean(x, y, p: float, epsilon_diag: float = 1e-4):
    """Stolarsky mean s_p(x, y) = ((x^p - y^p) / (p (x - y)))^(1/(p-1)).

    The cases p = 0 (logarithmic mean), p = 1 (identric mean), x = y, and
    y = 0 are evaluated by their limits. Symmetric, 1-homogeneous, and
    monotone nondecreasing in p; min(x,y) <= s_p <= max(x,y).
    """
    x, y, scalar = _prepare_pair(x, y)
    m = np.maximum(x, y)
    lo = np.minimum(x, y)
    out = np.empty_like(m)

    both_zero = m == 0.0
    out[both_zero] = 0.0

    # series branch covers the diagonal (and every x == y exactly)
    diag = (~both_zero) & (m - lo <= epsilon_diag * m)
    if np.any(diag):
        qa, c4 = _series_coeffs(p)
        mu = 0.5 * (x[diag] + y[diag])
        t = (x[diag] - y[diag]) / (x[diag] + y[diag])
        t2 = t * t
        out[diag] = mu * (1.0 + qa * t2 + c4 * t2 * t2)

    rest = ~(both_zero | diag)
    if np.any(rest):
        mm, rr = m[rest], lo[rest] / m[rest]
        vals = np.empty_like(mm)
        axis = rr == 0.0
        if np.any(axis):
            if abs(p - 1.0) < _P_EPS:
                vals[axis] = mm[axis] / np.e
            elif p > 0:
                vals[axis] = mm[axis] * p ** (-1.0 / (p - 1.0))
            else:
                vals[axis] = 0.0
        inner = ~axis
        if np.any(inner):
            mi, ri = mm[inner], rr[inner]
            if abs(p) < _P_EPS:
                v = -(1.0 - ri) / np.log(ri)
            elif abs(p - 1.0) < _P_EPS:
                v = np.exp(-1.0 - ri * np.log(ri) / (1.0 - ri))
            else:
                with np.errstate(over="ignore"):
                    num = -np.expm1(p * np.log(ri))
                    w = num / (p * (1.0 - ri))
                    v = np.exp(np.log(w) / (p - 1.0))
            vals[inner] = mi * v
        out[rest] = vals
    return float(out[0]) if scalar else out


def _stolarsky_mean_grad(x, y, p: float, epsilon_diag: float):
    """(s, ds/dx, ds/dy) for strictly positive x, y. Internal, array-only."""
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("analytic Stolarsky gradient needs strictly positive inputs")
    s = stolarsky_mean(x, y, p, epsilon_diag)
    s = np.atleast_1d(np.asarray(s, dtype=float))
    dsx = np.empty_like(s)
    dsy = np.empty_like(s)
    m = np.maximum(x, y)
    diag = np.abs(x - y) <= epsilon_diag * m
    if np.any(diag):
        qa, c4 = _series_coeffs(p)
        xd, yd = x[diag], y[diag]
        tot = xd + yd
        mu = 0.5 * tot
        t = (xd - yd) / tot
        poly = 1.0 + qa * t * t + c4 * t**4
        dpoly = 2.0 * qa * t + 4.0 * c4 * t**3
        dsx[diag] = 0.5 * poly + mu * dpoly * (2.0 * yd / tot**2)
        dsy[diag] = 0.5 * poly + mu * dpoly * (-2.0 * xd / tot**2)
    rest = ~diag
    if np.any(rest):
        xr, yr, sr = x[rest], y[rest], s[rest]
        d = xr - yr
        if abs(p) < _P_EPS:
            # s = d / log(x/y)
            ell = np.log(xr / yr)
            dsx[rest] = (ell - d / xr) / ell**2
            dsy[rest] = (-ell + d / yr) / ell**2
        elif abs(p - 1.0) < _P_EPS:
            # log s = -1 + (x log x - y log y) / (x - y)
            num = xr * np.log(xr) - yr * np.log(yr)
            dsx[rest] = sr * ((1.0 + np.log(xr)) * d - num) / d**2
            dsy[rest] = sr * (-(1.0 + np.log(yr)) * d + num) / d**2
        else:
            a = xr**p - yr**p
            q = 1.0 / (p - 1.0)
            dsx[rest] = q * sr * (p * xr ** (p - 1.0) / a - 1.0 / d)
            dsy[rest] = q * sr * (-p * yr ** (p - 1.0) / a + 1.0 / d)
    return s, dsx, dsy


def activity(spec: ActivitySpec, x, y):
    """sigma(x, y) for the family; (alpha-2)-homogeneous, >= 0.

    At (0, 0) the homogeneity degree alpha - 2 admits a continuous extension
    (value 0) only for alpha > 2; other cases raise.
    """
    x, y, scalar = _prepare_pair(x, y)
    a = spec.alpha
    origin = (x == 0.0) & (y == 0.0)
    if np.any(origin) and not (a > 2 or spec.family == "mass-action"):
        raise ValueError(f"sigma has no continuous extension at (0,0) for alpha = {a}")
    out = np.zeros_like(x)
    pos = ~origin
    if spec.family == "mass-action":
        out[:] = 1.0
    elif spec.family == "mrss":
        out[pos] = 2.0 / (x[pos] + y[pos])
    elif spec.family == "root-difference":
        s = stolarsky_mean(x[pos], y[pos], a / 2.0, spec.epsilon_diag)
        out[pos] = np.atleast_1d(s) ** (a - 2.0)
    else:  # stolarsky-power
        s = np.atleast_1d(stolarsky_mean(x[pos], y[pos], a, spec.epsilon_diag))
        with np.errstate(divide="ignore"):
            out[pos] = s ** (2.0 * a - 2.0) * 2.0 / (x[pos] ** a + y[pos] ** a)
    return float(out[0]) if scalar else out


def _extended_product(spec: ActivitySpec, x, y, factor):
    """sigma(x,y) * factor(x,y) where factor vanishes fast enough on the
    diagonal/origin for the product to extend continuously; factor is already
    evaluated. Internal helper for jbar / sbar."""
    a = spec.alpha
    out = np.zeros_like(x)
    origin = (x == 0.0) & (y == 0.0)
    pos = ~origin
    if spec.family == "mass-action":
        out[pos] = factor[pos]
    elif spec.family == "mrss":
        out[pos] = 2.0 * factor[pos] / (x[pos] + y[pos])
    elif spec.family == "root-difference":
        s = np.atleast_1d(stolarsky_mean(x[pos], y[pos], a / 2.0, spec.epsilon_diag))
        with np.errstate(divide="ignore", invalid="ignore"):
            v = s ** (a - 2.0) * factor[pos]
        # s = 0 only happens on the axes, where the closed-form extension is
        # s_{a/2}(x,0)^(a-2) = (4/alpha^2) x^(a-2)
        ax = s == 0.0
        if np.any(ax):
            xm = np.maximum(x[pos][ax], y[pos][ax])
            v[ax] = (4.0 / a**2) * xm ** (a - 2.0) * factor[pos][ax]
        out[pos] = v
    else:  # stolarsky-power
        s = np.atleast_1d(stolarsky_mean(x[pos], y[pos], a, spec.epsilon_diag))
        with np.errstate(divide="ignore", invalid="ignore"):
            v = s ** (2.0 * a - 2.0) * 2.0 / (x[pos] ** a + y[pos] ** a) * factor[pos]
        ax = s == 0.0
        if np.any(ax):
            xm = np.maximum(x[pos][ax], y[pos][ax])
            v[ax] = (2.0 / a**2) * xm ** (a - 2.0) * factor[pos][ax]
        out[pos] = v
    return out


def jbar(spec: ActivitySpec, x, y):
    """Extended flux jbar(x, y) = sigma(x, y) (x^2 - y^2), continuous on [0,oo)^2.

    jbar(x, x) = 0 and jbar(x, 0) > 0 for x > 0; sign(jbar) = sign(x - y).
    """
    x, y, scalar = _prepare_pair(x, y)
    out = _extended_product(spec, x, y, (x - y) * (x + y))
    return float(out[0]) if scalar else out


def sbar(spec: ActivitySpec, x, y):
    """Extended slope summand sigma(x, y) (x - y)^2, continuous on [0,oo)^2."""
    x, y, scalar = _prepare_pair(x, y)
    out = _extended_product(spec, x, y, (x - y) ** 2)
    return float(out[0]) if scalar else out


def mobility(spec: ActivitySpec, x, y):
    """Mobility m(x, y) = sigma(x, y) * x * y, homogeneous of degree alpha.

    Satisfies max{x^a, y^a} >= m(x,y) >= s_a(x,y)^(2a-2) x y min{x^-a, y^-a};
    vanishes on the axes by continuous extension.
    """
    x, y, scalar = _prepare_pair(x, y)
    out = np.zeros_like(x)
    inner = (x > 0.0) & (y > 0.0)
    if np.any(inner):
        out[inner] = activity(spec, x[inner], y[inner]) * x[inner] * y[inner]
    return float(out[0]) if scalar else out


def geometric_neighbor_mean(c: np.ndarray) -> np.ndarray:
    """g_k = sqrt(c_{k-1} c_{k+1}), cyclic."""
    c = np.asarray(c, dtype=float)
    return np.sqrt(np.roll(c, 1) * np.roll(c, -1))


def flux(spec: ActivitySpec, c) -> np.ndarray:
    """Diffusive flux J_k = N^2 jbar(c_k, sqrt(c_{k-1} c_{k+1}))."""
    c = np.asarray(c, dtype=float)
    if np.any(c < 0):
        raise ValueError("density must be componentwise >= 0")
    n = c.size
    return n**2 * jbar(spec, c, geometric_neighbor_mean(c))


def rhs(spec: ActivitySpec, c) -> np.ndarray:
    """Right-hand side dc/dt = laplacian(flux); telescopes to exact zero mean."""
    return laplacian(flux(spec, c))


def _jbar_grad(spec: ActivitySpec, x, y):
    """(d jbar/dx, d jbar/dy) for strictly positive inputs (analytic Jacobian)."""
    a = spec.alpha
    f = (x - y) * (x + y)
    dfx, dfy = 2.0 * x, -2.0 * y
    if spec.family == "mass-action":
        return dfx, dfy
    if spec.family == "mrss":
        return np.full_like(x, 2.0), np.full_like(x, -2.0)
    if spec.family == "root-difference":
        s, sx, sy = _stolarsky_mean_grad(x, y, a / 2.0, spec.epsilon_diag)
        sig = s ** (a - 2.0)
        dsig = (a - 2.0) * s ** (a - 3.0)
        return dsig * sx * f + sig * dfx, dsig * sy * f + sig * dfy
    s, sx, sy = _stolarsky_mean_grad(x, y, a, spec.epsilon_diag)
    den = x**a + y**a
    sig = s ** (2.0 * a - 2.0) * 2.0 / den
    dsig_x = (2.0 * a - 2.0) * s ** (2.0 * a - 3.0) * sx * 2.0 / den - sig * a * x ** (a - 1.0) / den
    dsig_y = (2.0 * a - 2.0) * s ** (2.0 * a - 3.0) * sy * 2.0 / den - sig * a * y ** (a - 1.0) / den
    return dsig_x * f + sig * dfx, dsig_y * f + sig * dfy


def flux_jacobian_diagonals(spec: ActivitySpec, c: np.ndarray):
    """Nonzero diagonals (dJ_k/dc_{k-1}, dJ_k/dc_k, dJ_k/dc_{k+1}) of the flux.

    Analytic mode; requires a strictly positive state (the boundary partials
    can be one-sidedly infinite, e.g. d jbar/dy ~ y^(alpha-1) for alpha < 1).
    """
    c = np.asarray(c, dtype=float)
    if np.any(c <= 0):
        raise ValueError("analytic flux Jacobian needs a strictly positive state")
    n = c.size
    g = geometric_neighbor_mean(c)
    jx, jy = _jbar_grad(spec, c, g)
    # dg/dc_{k+-1} = g / (2 c_{k+-1})
    d_prev = n**2 * jy * g / (2.0 * np.roll(c, 1))
    d_self = n**2 * jx
    d_next = n**2 * jy * g / (2.0 * np.roll(c, -1))
    return d_prev, d_self, d_next


def _loguniform(rng: np.random.Generator, size: int, lo=1e-6, hi=1e6) -> np.ndarray:
    return np.exp(rng.uniform(np.log(lo), np.log(hi), size))


def check_admissibility(
    spec: ActivitySpec,
    samples: int = 100_000,
    seed: int = 0,
    rel_tol: float = 1e-9,
    sigma_override=None,
):
    """Sampled certificate for the activity assumptions.

    Draws `samples` log-uniform pairs on [1e-6, 1e6]^2 and evaluates the
    relative violation margins of

      * the upper bound   max{x^a, y^a} >= sigma(x,y) x y,
      * the lower bound   sigma(x,y) >= s_a(x,y)^(2a-2) min{x^-a, y^-a},
      * the mean chain    s_a^(a-1) sqrt(xy) <= (x^a + y^a)/2 <= max{x^a, y^a},
      * both mobility bounds,
      * (alpha-2)-homogeneity of sigma.

    Report-only: returns a dict with worst margins and a `passed` flag;
    `sigma_override` (a callable (x, y) -> sigma) replaces the family for
    negative-control testing.
    """
    rng = np.random.default_rng(seed)
    a = spec.alpha
    x = _loguniform(rng, samples)
    y = _loguniform(rng, samples)
    sig = sigma_override(x, y) if sigma_override is not None else activity(spec, x, y)
    s = stolarsky_mean(x, y, a, spec.epsilon_diag)
    mx = np.maximum(x**a, y**a)
    mob = sig * x * y

    def worst(lhs, rhs):
        # largest relative amount by which lhs >= rhs fails
        viol = (rhs - lhs) / np.maximum(np.abs(lhs), np.abs(rhs))
        return float(np.max(viol))

    lower_ref = s ** (2.0 * a - 2.0) * np.minimum(x ** (-a), y ** (-a))
    margins = {
        "upper_bound": worst(mx, mob),
        "lower_bound": worst(sig, lower_ref),
        "mean_chain_left": worst(0.5 * (x**a + y**a), s ** (a - 1.0) * np.sqrt(x * y)),
        "mean_chain_right": worst(mx, 0.5 * (x**a + y**a)),
        "mobility_upper": worst(mx, mob),
        "mobility_lower": worst(mob, lower_ref * x * y),
    }
    lam = _loguniform(rng, samples, 1e-3, 1e3)
    sig_scaled = (
        sigma_override(lam * x, lam * y)
        if sigma_override is not None
        else activity(spec, lam * x, lam * y)
    )
    hom = np.abs(sig_scaled - lam ** (a - 2.0) * sig) / np.abs(sig_scaled)
    margins["homogeneity"] = float(np.max(hom))

    return {
        "family": spec.family,
        "alpha": a,
        "samples": samples,
        "seed": seed,
        "rel_tol": rel_tol,
        "margins": margins,
        "passed": bool(all(v <= rel_tol for v in margins.values())),
    }
