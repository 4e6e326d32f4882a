"""Acceptance criteria, each at its stated tolerance.

Run with `pytest tests/test_acceptance.py -v -s` to see one line per
criterion. Horizons for the structure-preservation runs are chosen so that
the positivity front generated by the first implicit step has swept the
bump's vacuum region by the first recorded snapshot.
"""

import time

import numpy as np
import pytest

from dlss_alpha import presets
from dlss_alpha.grid import laplacian, lp_norm
from dlss_alpha.integrator import SolverConfig, solve
from dlss_alpha.kinetics import ActivitySpec, check_admissibility
from dlss_alpha.similarity import shoot_profile, wave_residual
from dlss_alpha.variational import (
    cosh_primal,
    edb_functional,
    perspective,
    slope,
    slope_bound_certificate,
    slope_spatial_lower_bound,
)
from dlss_alpha.continuum import continuous_entropy, embed_density, embed_dual, embed_flux
from dlss_alpha.variational import entropy


def _report(name: str, passed: bool, detail: str = ""):
    print(f"\n[{'PASS' if passed else 'FAIL'}] {name}" + (f": {detail}" if detail else ""))
    assert passed, f"{name}: {detail}"


class TestAcceptance:
    def test_structure_preservation(self):
        alphas = (0.5, 1.0, 2.0, 4.0, 7.0)
        sizes = (64, 256, 1024)
        worst_drift, worst_wall = 0.0, 0.0
        for n in sizes:
            for alpha in alphas:
                spec = ActivitySpec(alpha=alpha)
                dt = 1000.0 / n**4
                for name, c0 in (("bump", presets.bump(n)), ("perturbed", presets.perturbed_uniform(n, 0.4, 2))):
                    t0 = time.perf_counter()
                    traj = solve(spec, SolverConfig(t_end=200 * dt, dt=dt, record_every=40), c0)
                    wall = time.perf_counter() - t0
                    masses = np.array([d.mass for d in traj.diagnostics])
                    drift = float(np.max(np.abs(masses - masses[0])))
                    min_pos = min(d.min_density for d in traj.diagnostics[1:])
                    energies = traj.energies()
                    ctx = f"alpha={alpha} n={n} {name}"
                    assert drift <= 1e-11, f"{ctx}: mass drift {drift:.2e}"
                    assert min_pos > 0.0, f"{ctx}: min density {min_pos:.2e}"
                    assert np.all(np.diff(energies) <= 1e-10), f"{ctx}: entropy increased"
                    if n == 1024:
                        assert wall <= 180.0, f"{ctx}: run took {wall:.0f}s"
                    worst_drift = max(worst_drift, drift)
                    worst_wall = max(worst_wall, wall) if n == 1024 else worst_wall
        _report(
            "structure preservation (mass/positivity/entropy, 5 alphas x 3 N x 2 data)",
            True,
            f"worst drift {worst_drift:.1e}, worst N=1024 wall {worst_wall:.1f}s",
        )

    def test_edb_residual_order(self):
        n = 128
        details = []
        ok = True
        for alpha in (1.0, 2.0):
            spec = ActivitySpec(alpha=alpha)
            c0 = presets.perturbed_uniform(n, 0.2, 1)
            residuals = []
            for k in range(5):
                dt = 4e-6 / 2**k
                traj = solve(spec, SolverConfig(t_end=4e-5, dt=dt, newton_tol=1e-12), c0)
                assert traj.meta["dt_halvings"] == 0, "study must run at the nominal dt"
                residuals.append(abs(edb_functional(spec, traj)))
            orders = [float(np.log2(residuals[i] / residuals[i + 1])) for i in range(4)]
            ok &= all(o >= 0.9 for o in orders)
            details.append(f"alpha={alpha}: orders {['%.2f' % o for o in orders]}")
        _report("EDB residual decays at least linearly in dt (4 halvings)", ok, "; ".join(details))

    def test_inequality_suites(self):
        seed = 20240809
        tol = 1e-9
        worst = {}
        for alpha in (0.5, 1.0, 2.0, 4.0):
            rep = check_admissibility(ActivitySpec(alpha=alpha), samples=100_000, seed=seed)
            worst[f"alpha={alpha}"] = max(rep["margins"].values())
            assert rep["passed"], f"admissibility margins at alpha={alpha}: {rep['margins']}"

        rng = np.random.default_rng(seed)
        s = rng.uniform(-20, 20, 100_000)
        w = np.exp(rng.uniform(np.log(1e-3), np.log(1e3), 100_000))
        q = np.exp(rng.uniform(np.log(1.05), np.log(8.0), 100_000))
        lhs = cosh_primal(s)
        rhs = q / (q - 1) * perspective(s, w) + 4 * w**q / (q - 1)
        viol = (lhs - rhs) / np.maximum(np.abs(lhs), np.abs(rhs))
        viol = viol[np.isfinite(viol)]
        assert np.max(viol) <= tol, f"magical estimate violation {np.max(viol):.2e}"

        lam = np.sort(np.exp(rng.uniform(np.log(1e-2), np.log(1e2), 1000)))
        mono_worst = 0.0
        for sv in (-5.0, -0.5, 0.7, 4.0):
            for wv in (1e-2, 0.5, 3.0, 50.0):
                vals = perspective(lam * sv, lam**2 * wv)
                steps = np.diff(vals)
                scale = np.maximum(np.abs(vals[:-1]), 1.0)
                mono_worst = max(mono_worst, float(np.max(-steps / scale)))
        assert mono_worst <= tol, f"perspective monotonicity violation {mono_worst:.2e}"

        bound_worst = 0.0
        for alpha in (0.5, 1.0, 2.0, 4.0):
            spec = ActivitySpec(alpha=alpha)
            for _ in range(2500):
                c = rng.uniform(0.0, 3.0, 24)
                s_val = slope(spec, c)
                b_val = slope_spatial_lower_bound(c, alpha)
                if b_val > 0:
                    bound_worst = max(bound_worst, (b_val - s_val) / b_val)
        assert bound_worst <= tol, f"spatial regularity bound violation {bound_worst:.2e}"

        xs = np.linspace(0.0, 20.0, 2000)
        cert_min = 0.0
        for xv in xs:
            ts = np.linspace(0.0, xv**2, 2000)
            vals = slope_bound_certificate(xv, ts)
            cert_min = min(cert_min, float(np.min(vals) / max(1.0, xv**4)))
        assert cert_min >= -tol, f"certificate polynomial violation {cert_min:.2e}"

        _report(
            "inequality suites at 1e-9 relative (1e5 samples/alpha; certificate on 2000x2000)",
            True,
            f"worst admissibility margins {max(worst.values()):.1e}",
        )

    def test_closed_form_oracles(self):
        prof = shoot_profile(1.0, b_bracket=(-1.0, -0.1), y_max=30.0)
        b_err = abs(prof.b_star + 0.5)
        mask = prof.y_grid <= 4.0
        gauss_err = float(np.max(np.abs(prof.phi[mask] - np.exp(-prof.y_grid[mask] ** 2 / 4))))
        assert b_err <= 1e-6, f"b* error {b_err:.2e}"
        assert gauss_err <= 1e-6, f"Gaussian profile error {gauss_err:.2e}"

        residuals = [wave_residual(1.5, 1.0, h) for h in (0.2, 0.1, 0.05, 0.025)]
        orders = [float(np.log2(residuals[i] / residuals[i + 1])) for i in range(3)]
        assert all(o >= 3.5 for o in orders), f"wave residual orders {orders}"

        tail_half = shoot_profile(0.5, b_bracket=(-2.0, -0.05), y_max=60.0).tail
        assert tail_half is not None and abs(tail_half.exponent - 6.0) <= 0.3, (
            f"alpha=0.5 tail exponent {None if tail_half is None else tail_half.exponent}"
        )
        prof2 = shoot_profile(2.0, b_bracket=(-2.0, -0.05), y_max=60.0)
        assert prof2.tail is not None and abs(prof2.tail.exponent - 3.0) <= 0.1, (
            f"alpha=2 support exponent {None if prof2.tail is None else prof2.tail.exponent}"
        )
        _report(
            "closed-form oracles (Gaussian shooting, 4th-order front residual, tail exponents)",
            True,
            f"b*={prof.b_star:.8f}, orders={['%.2f' % o for o in orders]}, "
            f"tails: {tail_half.exponent:.2f} (target 6), {prof2.tail.exponent:.3f} (target 3)",
        )

    def test_embedding_identities(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            c = rng.uniform(0.0, 3.0, int(rng.integers(8, 200)))
            assert continuous_entropy(embed_density(c)) == entropy(c)

        worst_ratio = 0.0
        for _ in range(1000):
            J = rng.standard_normal(64) * rng.uniform(0.1, 10.0)
            ratio = embed_flux(J).l1_norm() / lp_norm(J, 1)
            worst_ratio = max(worst_ratio, ratio)
            assert ratio <= 2.0 + 1e-12, f"flux embedding ratio {ratio}"

        comm = {}
        for n in (16, 64, 256, 1024, 4096):
            lhs = embed_dual(lambda u: -((2 * np.pi) ** 2) * np.sin(2 * np.pi * u), n)
            rhs = laplacian(embed_dual(lambda u: np.sin(2 * np.pi * u), n))
            measured = float(np.max(np.abs(lhs - rhs)))
            bound = (2 * np.pi) ** 3 / (3 * n)
            comm[n] = (measured, bound)
            assert measured <= bound, f"commutator at N={n}: {measured} > {bound}"
        _report(
            "embedding identities (exact entropy; flux L1 bound x1000; commutator N<=4096)",
            True,
            f"max flux ratio {worst_ratio:.3f} (bound 2), commutator at N=4096: "
            f"{comm[4096][0]:.2e} <= {comm[4096][1]:.2e}",
        )

    def test_self_convergence(self):
        spec = ActivitySpec(alpha=1.0)
        rho0 = lambda x: 1.0 + 0.5 * np.sin(2 * np.pi * np.asarray(x, dtype=float))
        finals = {}
        for n in (64, 128, 256, 512, 1024):
            c0 = embed_dual(rho0, n)
            traj = solve(spec, SolverConfig(t_end=2e-5, dt=1e-7, record_every=200), c0)
            assert traj.meta["dt_halvings"] == 0, "all resolutions must share one dt"
            finals[n] = traj.final_state
        diffs = {}
        for n in (64, 128, 256, 512):
            fine = 0.5 * (finals[2 * n][0::2] + finals[2 * n][1::2])
            diffs[n] = lp_norm(finals[n] - fine, 1)
        orders = [float(np.log2(diffs[n] / diffs[2 * n])) for n in (64, 128, 256)]
        ok = all(o >= 1.8 for o in orders)
        _report(
            "self-convergence in L1 (alpha=1, N=64..1024)",
            ok,
            f"orders {['%.2f' % o for o in orders]} (>= 1.8)",
        )
