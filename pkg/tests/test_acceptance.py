"""Acceptance gate: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s` (or `stablesde run --all`
for the CLI equivalent).  The heavy criteria use the compiled kernel when
available; total runtime on two cores is roughly 12-15 minutes, dominated
by the uniqueness-threshold experiment.
"""

import json
import math
import time

import numpy as np
import pytest
from scipy import stats

from stablesde.bump import Bump
from stablesde.drifts import example1_drift, tanaka_drift, zero_drift
from stablesde.experiments import regression_data
from stablesde.gridsolve import GridSpec, comparison_check, fft_oracle, solve_resolvent
from stablesde.integrate import (
    bifurcation_gap,
    mc_resolvent,
    path_statistics,
    select_truncation,
)
from stablesde.kernels import uniforms
from stablesde.measures import (
    Cone,
    admissible_theta_interval,
    check_cone_condition,
    compute_epsilon0,
    cone_second_moment,
    independent_coordinates_measure,
    isotropic_measure,
    lattice_rays_measure,
    levy_symbol,
    standard_symmetric_1d,
)
from stablesde.sampling import SamplerSpec, empirical_cf_table, sample_increments


def report(name, passed, detail=""):
    status = "PASS" if passed else "FAIL"
    print(f"[acceptance] {name}: {status} {detail}")
    assert passed, f"{name}: {detail}"


class TestAcceptance:
    def test_criterion_1_hypothesis_certification_isotropic(self):
        t0 = time.time()
        ok = True
        details = []
        for alpha in (0.3, 0.5, 0.7):
            theta = 0.8 * admissible_theta_interval(alpha).corrected[1]
            for d in (1, 2):
                m = isotropic_measure(d, alpha, 1.0)
                rep = check_cone_condition(m, theta)
                ok &= rep.satisfied and rep.kappa_hat > 0
                # scaling invariance of the certified ratio
                axis = np.zeros(d)
                axis[0] = 1.0
                cone = Cone(axis=axis, apex_angle=theta)
                base = cone_second_moment(m, cone, 1.0)
                for delta in (0.5, 2.0**-10, 2.0**-20):
                    val = cone_second_moment(m, cone, delta)
                    expect = delta ** (2.0 - alpha) * base
                    ok &= abs(val - expect) <= 1e-10 * abs(expect)
                details.append(f"a={alpha},d={d}:kappa={rep.kappa_hat:.4f}")
        dt = time.time() - t0
        ok &= dt < 10.0
        report("criterion 1 (isotropic certification)", ok,
               f"{'; '.join(details)} ({dt:.1f}s < 10s)")

    def test_criterion_2_hypothesis_refutation_and_lattice(self):
        t0 = time.time()
        ok = True
        indep = independent_coordinates_measure(0.5)
        worst_angles = []
        for theta in (0.2, 0.4, 0.6155, 0.7, math.pi / 4):
            rep = check_cone_condition(indep, theta)
            ok &= not rep.satisfied
            ang = math.atan2(rep.worst_direction[1], rep.worst_direction[0])
            diag_dist = min(
                abs((ang - d + math.pi) % (2 * math.pi) - math.pi)
                for d in (math.pi / 4, 3 * math.pi / 4, -math.pi / 4, -3 * math.pi / 4)
            )
            worst_angles.append(math.degrees(diag_dist))
            ok &= diag_dist < math.radians(2.0)
        # lattice with spacing below twice the feasibility crossover
        crossover = admissible_theta_interval(0.5).corrected[1]
        spacing = 0.3
        ok &= spacing < 2.0 * crossover
        rep = check_cone_condition(lattice_rays_measure(0.5, spacing), 0.4)
        ok &= rep.satisfied and rep.kappa_hat > 0
        dt = time.time() - t0
        ok &= dt < 30.0
        report("criterion 2 (sparse-support refutation + lattice)", ok,
               f"worst-direction offsets {['%.2f' % a for a in worst_angles]} deg; "
               f"lattice kappa={rep.kappa_hat:.4f} ({dt:.1f}s < 30s)")

    def test_criterion_3_epsilon0(self):
        res = compute_epsilon0(2.0 / 3.0, 0.5, 0.2)
        ok = res.feasible and res.epsilon0 > 0
        fine = compute_epsilon0(2.0 / 3.0, 0.5, 0.2, grid=(512, 512))
        ok &= abs(res.epsilon0 - fine.epsilon0) < 1e-6
        baseline = regression_data()["epsilon0_baseline"]
        ok &= abs(res.epsilon0 - baseline["refined"]) < 1e-6
        ok &= res.epsilon0 >= baseline["grid_oracle_500x500"] - 1e-12
        # infeasible whenever cos^2 theta <= 1/(2-alpha)
        crossover = math.acos(math.sqrt(1.0 / 1.5))
        for theta in (crossover, crossover + 1e-3, 0.7, 1.2):
            bad = compute_epsilon0(1.0, 0.5, theta)
            ok &= (not bad.feasible) and bad.epsilon0 == 0.0
        doubled = compute_epsilon0(4.0 / 3.0, 0.5, 0.2)
        ok &= abs(doubled.epsilon0 - 2.0 * res.epsilon0) <= 1e-12 * doubled.epsilon0
        report("criterion 3 (threshold computation)", ok,
               f"epsilon0={res.epsilon0:.9f}, refinement drift "
               f"{abs(res.epsilon0 - fine.epsilon0):.2e}, linearity exact")

    def test_criterion_4_sampler_correctness(self):
        t0 = time.time()
        n = 10**6
        bound = 4.0 / math.sqrt(n)
        ok = True
        details = []
        for alpha in (0.3, 0.5, 0.7):
            from stablesde.measures import standard_isotropic

            cases = [
                SamplerSpec(measure=standard_symmetric_1d(alpha),
                            method="ray_sum", seed=1000 + int(alpha * 10)),
                SamplerSpec(measure=standard_isotropic(2, alpha),
                            method="subordination", seed=2000 + int(alpha * 10)),
                SamplerSpec(measure=standard_symmetric_1d(alpha),
                            method="compound_poisson", cutoff=0.02,
                            seed=3000 + int(alpha * 10)),
            ]
            for spec in cases:
                if spec.measure.d == 1:
                    xis = np.linspace(0.15, 3.0, 20)[:, None]
                else:
                    ang = np.linspace(0.0, 2 * np.pi, 20, endpoint=False)
                    r = 0.5 + 2.5 * (np.arange(20) % 5) / 4.0
                    xis = r[:, None] * np.column_stack([np.cos(ang), np.sin(ang)])
                dev, _ = empirical_cf_table(spec, 1.0, xis, n)
                ok &= dev < bound
                details.append(f"{spec.method}/a={alpha}:{dev:.5f}")
        # self-similarity KS at alpha=0.5
        h = 0.01
        a = sample_increments(
            SamplerSpec(measure=standard_symmetric_1d(0.5), method="ray_sum",
                        seed=11, stream_id=0), h, 10**5)[:, 0]
        b = sample_increments(
            SamplerSpec(measure=standard_symmetric_1d(0.5), method="ray_sum",
                        seed=11, stream_id=10**6), 1.0, 10**5)[:, 0]
        pv = stats.ks_2samp(a, h**2.0 * b).pvalue
        ok &= pv > 0.01
        dt = time.time() - t0
        ok &= dt < 120.0
        report("criterion 4 (sampler symbol match)", ok,
               f"max dev bound {bound:.5f}; " + "; ".join(details[:3])
               + f"...; KS p={pv:.3f} ({dt:.0f}s < 120s)")

    def test_criterion_5_mc_pde_fft_triangle(self):
        t0 = time.time()
        alpha, lam, h, n_paths = 0.5, 1.0, 1e-3, 10**5
        allowance = regression_data()["resolvent_triangle"]["allowance"]
        measure = standard_symmetric_1d(alpha)
        f = Bump(center=[0.0], radius=1.0, height=1.0)
        trunc = select_truncation(0.01, lam, 1.0, 0.0, measure)
        points = np.linspace(-2.0, 2.0, 9)

        grid = GridSpec(half_width=20.0, n_nodes=801)
        sol = solve_resolvent(grid, measure, None, lam, f.on_grid(grid.nodes()))
        u_fd = np.interp(points, grid.nodes(), sol.u)

        n_fft = 2**16
        dx = 512.0 / n_fft
        x_fft = -256.0 + dx * np.arange(n_fft)
        u_fft_all = fft_oracle(lam, alpha, levy_symbol(measure, np.array([1.0])),
                               f.on_grid(x_fft), dx)
        u_fft = np.interp(points, x_fft, u_fft_all)

        ok = bool(np.max(np.abs(u_fd - u_fft)) < allowance)
        worst = 0.0
        stream = 0
        for i, x in enumerate(points):
            spec = SamplerSpec(measure=measure, method="ray_sum", seed=500,
                               stream_id=stream)
            stream += n_paths
            est = mc_resolvent(float(x), lam, f, zero_drift(1), spec, trunc,
                               h, n_paths)
            tol = 3.0 * est.std_error + est.tail_bias_bound + allowance
            dev = max(abs(est.value - u_fd[i]), abs(est.value - u_fft[i]))
            worst = max(worst, dev / tol)
            ok &= dev < tol
        dt = time.time() - t0
        ok &= dt < 300.0
        report("criterion 5 (MC/PDE/FFT triangle)", ok,
               f"worst dev/tol={worst:.2f}, fd-fft={np.max(np.abs(u_fd - u_fft)):.2e} "
               f"({dt:.0f}s < 300s)")

    def test_criterion_6_decay_and_exit_bound(self):
        t0 = time.time()
        alpha, lam, eps, h, n_paths = 0.5, 1.0, 0.01, 1e-3, 2 * 10**4
        measure = standard_symmetric_1d(alpha)
        drift = tanaka_drift(0.25)
        f = Bump(center=[0.0], radius=1.0, height=1.0)
        trunc = select_truncation(eps, lam, f.sup_norm, drift.sup_bound, measure)
        trunc.validate(lam, f.sup_norm, drift.sup_bound, measure)
        horizon = math.ceil(trunc.T / h - 1e-12) * h
        spec = SamplerSpec(measure=measure, method="ray_sum", seed=600)
        _, maxd, _, invalid = path_statistics(0.0, drift, spec, horizon, h, n_paths)
        keep = invalid == 0
        exit_prob = float(np.mean(maxd[keep] >= trunc.R))
        bound = 3.0 * lam * eps / (4.0 * f.sup_norm)
        se = math.sqrt(max(exit_prob * (1 - exit_prob), 1.0 / n_paths) / n_paths)
        ok = exit_prob < bound + 3.0 * se

        x_far = f.support_radius + trunc.R + 1.0
        est = mc_resolvent(x_far, lam, f, drift,
                           SamplerSpec(measure=measure, method="ray_sum",
                                       seed=601), trunc, h, n_paths)
        ok &= abs(est.value) < eps + 3.0 * est.std_error
        dt = time.time() - t0
        ok &= dt < 300.0
        report("criterion 6 (exit bound + far-field decay)", ok,
               f"exit={exit_prob:.2e} < {bound:.2e}+3se, far |u|={abs(est.value):.2e} "
               f"< {eps} ({dt:.0f}s < 300s)")

    def test_criterion_7_discrete_comparison_principle(self):
        t0 = time.time()
        measure = standard_symmetric_1d(0.5)
        grid = GridSpec(half_width=8.0, n_nodes=161)
        x = grid.nodes()
        n_trials, n_fail = 0, 0
        for drift in (example1_drift(0.5), tanaka_drift(0.25)):
            for trial in range(50):
                u = uniforms(777, trial, 0, np.arange(6, dtype=np.uint64))
                f1 = Bump(center=[4 * u[0] - 2], radius=0.5 + 2 * u[1],
                          height=2 * u[2])(x)
                f2 = f1 + Bump(center=[4 * u[3] - 2], radius=0.3 + u[4],
                               height=u[5])(x)
                s1 = solve_resolvent(grid, measure, drift, 1.0, f1)
                s2 = solve_resolvent(grid, measure, drift, 1.0, f2)
                okc, viol = comparison_check(s1, s2)
                n_trials += 1
                n_fail += 0 if okc else 1
                assert s1.matrix_diagnostics["max_offdiag"] <= 0.0
                assert s1.matrix_diagnostics["min_row_dominance_margin"] >= -1e-9
        dt = time.time() - t0
        ok = n_fail == 0 and n_trials == 100 and dt < 60.0
        report("criterion 7 (discrete comparison principle)", ok,
               f"{n_trials - n_fail}/{n_trials} ordered pairs comparison-consistent, "
               f"M-matrix certified ({dt:.0f}s < 60s)")

    def test_criterion_8_uniqueness_threshold(self):
        t0 = time.time()
        n_paths, h = 10**5, 1e-4
        epsilons = [1e-1, 1e-2, 1e-3, 1e-4]
        noise_3sigma = 3.0 * math.sqrt(2.0 * 0.25 / n_paths)
        above = bifurcation_gap(0.75, 0.5, epsilons, T=1.0, h=h, N=n_paths,
                                threshold=0.5, seed=2025)
        gaps_above = [g for _, g in above]
        ok = all(b <= a + noise_3sigma for a, b in zip(gaps_above, gaps_above[1:]))
        ok &= gaps_above[-1] < 0.05

        below = bifurcation_gap(0.25, 0.5, epsilons, T=1.0, h=h, N=n_paths,
                                threshold=0.5, seed=2025)
        gaps_below = [g for _, g in below]
        floor = regression_data()["bifurcation_floor"]["floor"]
        ok &= all(g > floor for g in gaps_below)
        dt = time.time() - t0
        ok &= dt < 900.0
        report("criterion 8 (uniqueness threshold dichotomy)", ok,
               f"beta=0.75 gaps {['%.4f' % g for g in gaps_above]} (monotone to <0.05); "
               f"beta=0.25 gaps {['%.4f' % g for g in gaps_below]} all > floor "
               f"{floor:.4f} ({dt:.0f}s < 900s)")
