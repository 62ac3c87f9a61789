"""Experiment families behind the command-line interface.

Each experiment consumes a resolved configuration mapping, produces
machine-readable artifacts (CSV tables with header rows, JSON documents)
and a list of assertion failures; the CLI turns those into files, a run
manifest and an exit code.  Default configurations for the full suite are
the package's acceptance gate.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .bump import Bump
from .drifts import drift_from_config, zero_drift
from .errors import ConfigurationError
from .gridsolve import GridSpec, comparison_check, fft_oracle, solve_resolvent
from .integrate import (
    bifurcation_gap,
    mc_resolvent,
    path_statistics,
    select_truncation,
)
from .kernels import backend_name, uniforms
from .measures import (
    SpectralMeasure,
    admissible_theta_interval,
    check_cone_condition,
    compute_epsilon0,
    independent_coordinates_measure,
    isotropic_measure,
    lattice_rays_measure,
    standard_isotropic,
    standard_symmetric_1d,
)
from .sampling import SamplerSpec, empirical_cf_table, sample_increments

__all__ = [
    "ExperimentResult",
    "measure_from_config",
    "run_experiment",
    "default_suite",
    "regression_data",
    "COMMANDS",
]


@dataclass
class ExperimentResult:
    command: str
    passed: bool
    failures: list = field(default_factory=list)
    files: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)


def measure_from_config(doc) -> SpectralMeasure:
    """Measure from an explicit document or a named preset."""
    if "preset" in doc:
        name = doc["preset"]
        alpha = float(doc["alpha"])
        if name == "standard_1d":
            return standard_symmetric_1d(alpha)
        if name == "standard_isotropic":
            return standard_isotropic(int(doc.get("d", 1)), alpha)
        if name == "isotropic":
            return isotropic_measure(int(doc.get("d", 2)), alpha, float(doc.get("c", 1.0)))
        if name == "independent_coordinates":
            return independent_coordinates_measure(alpha, d=int(doc.get("d", 2)))
        if name == "lattice_rays":
            return lattice_rays_measure(alpha, float(doc["spacing"]))
        raise ConfigurationError(f"unknown measure preset {name!r}")
    return SpectralMeasure.from_json(doc)


def regression_data() -> dict:
    """Calibration constants recorded alongside the package."""
    from importlib import resources

    with resources.files("stablesde").joinpath("data/regression.json").open() as fh:
        return json.load(fh)


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _threads(config) -> int:
    import os

    env = os.environ.get("STABLESDE_THREADS")
    if env:
        return max(1, int(env))
    return int(config.get("threads", 0))


# --------------------------------------------------------------------------
# hk-check


def run_hk_check(config) -> ExperimentResult:
    measure = measure_from_config(config["measure"])
    thetas = config.get("thetas")
    if thetas is None:
        thetas = [config["theta"]]
    grid_size = int(config.get("direction_grid_size", 720))
    delta_grid = config.get("delta_grid")
    failures = []
    rows = []
    reports = []
    for theta in thetas:
        rep = check_cone_condition(measure, float(theta),
                                   direction_grid_size=grid_size,
                                   delta_grid=delta_grid)
        reports.append(rep)
        rows.append((theta, rep.kappa_hat, int(rep.satisfied),
                     *[float(x) for x in rep.worst_direction]))
        expect = config.get("expect_satisfied")
        if expect is not None and rep.satisfied != bool(expect):
            failures.append(
                f"theta={theta}: satisfied={rep.satisfied}, expected {bool(expect)}"
            )
    intervals = admissible_theta_interval(measure.alpha)
    doc = {
        "alpha": measure.alpha,
        "theta_interval_printed": list(intervals.printed),
        "theta_interval_corrected": list(intervals.corrected),
        "reports": [rep.to_json() for rep in reports],
    }
    files = {
        "cone_report.json": json.dumps(doc, indent=1, sort_keys=True),
        "cone_summary.csv": _csv(
            ["theta", "kappa_hat", "satisfied"]
            + [f"worst_dir_{i}" for i in range(measure.d)],
            rows,
        ),
        "cone_directions.csv": reports[0].to_csv(),
    }
    return ExperimentResult("hk-check", not failures, failures, files,
                            {"kappa_hat": reports[0].kappa_hat})


# --------------------------------------------------------------------------
# epsilon0


def run_epsilon0(config) -> ExperimentResult:
    kappa = float(config["kappa"])
    alpha = float(config["alpha"])
    theta = float(config["theta"])
    grid = tuple(config.get("grid", (256, 256)))
    res = compute_epsilon0(kappa, alpha, theta, grid=grid)
    failures = []
    expect = config.get("expect_feasible")
    if expect is not None and res.feasible != bool(expect):
        failures.append(f"feasible={res.feasible}, expected {bool(expect)}")
    doc = {"kappa": kappa, "alpha": alpha, "theta": theta, **res.to_json()}
    return ExperimentResult(
        "epsilon0", not failures, failures,
        {"epsilon0.json": json.dumps(doc, indent=1, sort_keys=True)},
        {"epsilon0": res.epsilon0},
    )


# --------------------------------------------------------------------------
# sampler-validate


def _frequency_grid(measure, n_freq, scale):
    if measure.d == 1:
        return np.linspace(scale / n_freq, scale, n_freq)[:, None]
    ang = np.linspace(0.0, 2.0 * np.pi, n_freq, endpoint=False)
    radii = scale * (0.25 + 0.75 * (np.arange(n_freq) % 4) / 3.0)
    return radii[:, None] * np.column_stack([np.cos(ang), np.sin(ang)])


def run_sampler_validate(config) -> ExperimentResult:
    measure = measure_from_config(config["measure"])
    spec = SamplerSpec(
        measure=measure,
        method=config["method"],
        cutoff=config.get("cutoff"),
        seed=int(config.get("seed", 0)),
        stream_id=int(config.get("stream_id", 0)),
    )
    h = float(config.get("h", 1.0))
    n = int(config.get("n", 10**6))
    n_freq = int(config.get("n_frequencies", 20))
    scale = float(config.get("freq_scale", 2.0))
    xis = _frequency_grid(measure, n_freq, scale)
    max_dev, rows = empirical_cf_table(spec, h, xis, n)
    bound = 4.0 / math.sqrt(n)
    failures = []
    if max_dev >= bound:
        worst = max(rows, key=lambda r: r[3])
        failures.append(
            f"CF deviation {max_dev:.3e} >= 4/sqrt(N)={bound:.3e} at xi={worst[0]}"
        )
    table = _csv(
        [f"xi_{i}" for i in range(measure.d)] + ["empirical", "exact", "deviation"],
        [(*r[0], r[1], r[2], r[3]) for r in rows],
    )
    summary = {
        "method": spec.method,
        "alpha": measure.alpha,
        "n": n,
        "max_deviation": max_dev,
        "bound": bound,
        "passed": max_dev < bound,
    }
    if config.get("ks_self_similarity", False):
        from scipy import stats

        hs = float(config.get("ks_h", 0.01))
        n_ks = int(config.get("ks_n", 10**5))
        a = sample_increments(spec, hs, n_ks)[:, 0]
        spec_b = SamplerSpec(measure=measure, method=spec.method,
                             cutoff=spec.cutoff, seed=spec.seed,
                             stream_id=spec.stream_id + n_ks + 1)
        b = sample_increments(spec_b, 1.0, n_ks)[:, 0]
        pv = float(stats.ks_2samp(a, hs ** (1.0 / measure.alpha) * b).pvalue)
        summary["ks_pvalue"] = pv
        if pv <= 0.01:
            failures.append(f"self-similarity KS p-value {pv:.4f} <= 0.01")
    return ExperimentResult(
        "sampler-validate", not failures, failures,
        {"cf_table.csv": table,
         "sampler_validation.json": json.dumps(summary, indent=1, sort_keys=True)},
        summary,
    )


# --------------------------------------------------------------------------
# resolvent-compare


def run_resolvent_compare(config) -> ExperimentResult:
    alpha = float(config.get("alpha", 0.5))
    lam = float(config.get("lambda", 1.0))
    measure = (measure_from_config(config["measure"])
               if "measure" in config else standard_symmetric_1d(alpha))
    f = Bump.from_json(config.get("f", {"center": [0.0], "radius": 1.0, "height": 1.0}))
    pts_cfg = config.get("points", {"count": 9, "lo": -2.0, "hi": 2.0})
    if isinstance(pts_cfg, dict):
        points = np.linspace(float(pts_cfg["lo"]), float(pts_cfg["hi"]),
                             int(pts_cfg["count"]))
    else:
        points = np.asarray(pts_cfg, dtype=np.float64)
    h = float(config.get("h", 1e-3))
    n_paths = int(config.get("N", 10**5))
    eps = float(config.get("epsilon", 0.01))
    allowance = float(config.get("allowance",
                                 regression_data()["resolvent_triangle"]["allowance"]))
    grid_cfg = config.get("grid", {"half_width": 20.0, "n_nodes": 801})
    fft_cfg = config.get("fft", {"length": 512.0, "n": 65536})
    seed = int(config.get("seed", 0))
    nthreads = _threads(config)

    drift = zero_drift(1)
    trunc = select_truncation(eps, lam, f.sup_norm, drift.sup_bound, measure)

    grid = GridSpec(half_width=float(grid_cfg["half_width"]),
                    n_nodes=int(grid_cfg["n_nodes"]))
    sol = solve_resolvent(grid, measure, None, lam, f.on_grid(grid.nodes()))
    u_fd = np.interp(points, grid.nodes(), sol.u)

    n_fft = int(fft_cfg["n"])
    dx = float(fft_cfg["length"]) / n_fft
    x_fft = -0.5 * float(fft_cfg["length"]) + dx * np.arange(n_fft)
    from .measures import levy_symbol

    symbol_scale = levy_symbol(measure, np.array([1.0]))
    u_fft_grid = fft_oracle(lam, alpha, symbol_scale, f.on_grid(x_fft), dx)
    u_fft = np.interp(points, x_fft, u_fft_grid)

    rows = []
    failures = []
    stream = 0
    for i, x in enumerate(points):
        spec = SamplerSpec(measure=measure, method="ray_sum", seed=seed,
                           stream_id=stream)
        stream += n_paths
        est = mc_resolvent(float(x), lam, f, drift, spec, trunc, h, n_paths,
                           nthreads=nthreads)
        tol_mc = 3.0 * est.std_error + est.tail_bias_bound + allowance
        ok_mc_fd = abs(est.value - u_fd[i]) < tol_mc
        ok_mc_fft = abs(est.value - u_fft[i]) < tol_mc
        ok_fd_fft = abs(u_fd[i] - u_fft[i]) < allowance
        rows.append((x, est.value, est.std_error, u_fd[i], u_fft[i],
                     tol_mc, int(ok_mc_fd and ok_mc_fft and ok_fd_fft)))
        if not (ok_mc_fd and ok_mc_fft and ok_fd_fft):
            failures.append(
                f"x={x}: mc={est.value:.6f}+-{est.std_error:.6f} fd={u_fd[i]:.6f} "
                f"fft={u_fft[i]:.6f} tol={tol_mc:.6f}"
            )

    comparison_summary = None
    n_trials = int(config.get("comparison_trials", 0))
    if n_trials > 0:
        comparison_summary = _comparison_trials(measure, lam, n_trials)
        if not comparison_summary["all_passed"]:
            failures.append(
                f"comparison principle violated in "
                f"{comparison_summary['n_failures']} of {n_trials} trials"
            )

    table = _csv(["x", "mc_value", "mc_std_error", "fd_value", "fft_value",
                  "mc_tolerance", "passed"], rows)
    summary = {
        "alpha": alpha, "lambda": lam, "h": h, "N": n_paths,
        "allowance": allowance, "tail_bias_bound": math.exp(-lam * trunc.T) / lam,
        "max_fd_fft": float(np.max(np.abs(u_fd - u_fft))),
        "passed": not failures,
    }
    if comparison_summary is not None:
        summary["comparison"] = comparison_summary
    return ExperimentResult(
        "resolvent-compare", not failures, failures,
        {"resolvent_compare.csv": table,
         "resolvent_compare.json": json.dumps(summary, indent=1, sort_keys=True)},
        summary,
    )


def _comparison_trials(measure, lam, n_trials, seed=555):
    """Randomized ordered-pair comparison checks with both reference drifts."""
    from .drifts import example1_drift, tanaka_drift

    grid = GridSpec(half_width=8.0, n_nodes=161)
    x = grid.nodes()
    n_fail = 0
    min_margin = math.inf
    for drift in (example1_drift(measure.alpha), tanaka_drift(0.25)):
        for trial in range(n_trials // 2):
            u = uniforms(seed, trial, 0, np.arange(6, dtype=np.uint64))
            f1 = Bump(center=[4 * u[0] - 2], radius=0.5 + 2 * u[1],
                      height=2 * u[2])(x)
            f2 = f1 + Bump(center=[4 * u[3] - 2], radius=0.3 + u[4],
                           height=u[5])(x)
            s1 = solve_resolvent(grid, measure, drift, lam, f1)
            s2 = solve_resolvent(grid, measure, drift, lam, f2)
            ok, viol = comparison_check(s1, s2)
            if not ok:
                n_fail += 1
            min_margin = min(min_margin, -viol)
    return {"n_trials": 2 * (n_trials // 2), "n_failures": n_fail,
            "worst_margin": min_margin, "all_passed": n_fail == 0}


# --------------------------------------------------------------------------
# decay-check


def run_decay_check(config) -> ExperimentResult:
    alpha = float(config.get("alpha", 0.5))
    lam = float(config.get("lambda", 1.0))
    eps = float(config.get("epsilon", 0.01))
    measure = (measure_from_config(config["measure"])
               if "measure" in config else standard_symmetric_1d(alpha))
    f = Bump.from_json(config.get("f", {"center": [0.0], "radius": 1.0, "height": 1.0}))
    drift = drift_from_config(config.get("drift", {"drift": "tanaka", "beta": 0.25}))
    h = float(config.get("h", 1e-3))
    n_paths = int(config.get("N", 2 * 10**4))
    seed = int(config.get("seed", 0))
    nthreads = _threads(config)

    trunc = select_truncation(eps, lam, f.sup_norm, drift.sup_bound, measure)
    horizon = math.ceil(trunc.T / h - 1e-12) * h
    bound = 3.0 * lam * eps / (4.0 * f.sup_norm)

    spec = SamplerSpec(measure=measure, method="ray_sum", seed=seed, stream_id=0)
    _, maxd, _, invalid = path_statistics(0.0, drift, spec, horizon, h, n_paths,
                                          nthreads=nthreads)
    keep = invalid == 0
    exit_prob = float(np.mean(maxd[keep] >= trunc.R))
    se_exit = math.sqrt(max(exit_prob * (1 - exit_prob), 1.0 / n_paths) / n_paths)

    x_far = f.support_radius + trunc.R + 1.0
    spec_far = SamplerSpec(measure=measure, method="ray_sum", seed=seed,
                           stream_id=n_paths + 1)
    est = mc_resolvent(x_far, lam, f, drift, spec_far, trunc, h, n_paths,
                       nthreads=nthreads)

    failures = []
    if not exit_prob < bound + 3.0 * se_exit:
        failures.append(
            f"exit probability {exit_prob:.4g} exceeds bound {bound:.4g} + 3se"
        )
    if not abs(est.value) < eps + 3.0 * est.std_error:
        failures.append(
            f"far-field value {est.value:.4g} exceeds epsilon={eps} + 3se"
        )
    doc = {
        "epsilon": eps, "lambda": lam,
        "truncation": trunc.to_json(),
        "exit_probability": exit_prob,
        "exit_bound": bound,
        "exit_std_error": se_exit,
        "far_field_x": x_far,
        "far_field_value": est.value,
        "far_field_std_error": est.std_error,
        "passed": not failures,
    }
    table = _csv(["quantity", "value", "bound"],
                 [("exit_probability", exit_prob, bound + 3 * se_exit),
                  ("far_field_value", abs(est.value), eps + 3 * est.std_error)])
    return ExperimentResult(
        "decay-check", not failures, failures,
        {"decay_check.json": json.dumps(doc, indent=1, sort_keys=True),
         "decay_check.csv": table},
        doc,
    )


# --------------------------------------------------------------------------
# bifurcation


def run_bifurcation(config) -> ExperimentResult:
    alpha = float(config.get("alpha", 0.5))
    betas = [float(b) for b in config.get("betas", [0.25, 0.75])]
    epsilons = [float(e) for e in config.get("epsilons", [1e-1, 1e-2, 1e-3, 1e-4])]
    horizon = float(config.get("T", 1.0))
    h = float(config.get("h", 1e-4))
    n_paths = int(config.get("N", 10**5))
    threshold = float(config.get("threshold", 0.5))
    seed = int(config.get("seed", 2025))
    nthreads = _threads(config)

    se_gap = 3.0 * math.sqrt(2.0 * 0.25 / n_paths)
    rows = []
    failures = []
    summary = {"alpha": alpha, "T": horizon, "h": h, "N": n_paths,
               "threshold": threshold, "gap_3sigma": se_gap, "tables": {}}
    for beta in betas:
        gaps = bifurcation_gap(beta, alpha, epsilons, horizon, h, n_paths,
                               threshold=threshold, seed=seed, nthreads=nthreads)
        summary["tables"][str(beta)] = gaps
        for eps, gap in gaps:
            rows.append((beta, eps, gap))
        expect = config.get("expect", {}).get(str(beta))
        gap_vals = [g for _, g in gaps]
        if expect == "decreasing_below_0.05":
            if not all(b <= a + se_gap for a, b in zip(gap_vals, gap_vals[1:])):
                failures.append(f"beta={beta}: gaps not decreasing: {gap_vals}")
            if not gap_vals[-1] < 0.05:
                failures.append(f"beta={beta}: final gap {gap_vals[-1]:.4f} >= 0.05")
        elif expect == "floor":
            floor = float(config.get("floor",
                                     regression_data()["bifurcation_floor"]["floor"]))
            if not all(g > floor for g in gap_vals):
                failures.append(
                    f"beta={beta}: gap fell below calibrated floor {floor:.4f}: {gap_vals}"
                )
            summary["floor"] = floor
    table = _csv(["beta", "epsilon", "gap"], rows)
    summary["passed"] = not failures
    return ExperimentResult(
        "bifurcation", not failures, failures,
        {"bifurcation.csv": table,
         "bifurcation.json": json.dumps(summary, indent=1, sort_keys=True)},
        summary,
    )


# --------------------------------------------------------------------------
# suite

COMMANDS = {
    "hk-check": run_hk_check,
    "epsilon0": run_epsilon0,
    "sampler-validate": run_sampler_validate,
    "resolvent-compare": run_resolvent_compare,
    "decay-check": run_decay_check,
    "bifurcation": run_bifurcation,
}


def run_experiment(config) -> ExperimentResult:
    command = config.get("command")
    if command not in COMMANDS:
        raise ConfigurationError(f"unknown command {command!r}")
    return COMMANDS[command](config)


def default_suite(fast: bool = False) -> list:
    """Configurations mirroring the acceptance criteria.

    fast=True shrinks sample sizes for smoke runs; the acceptance gate uses
    the full sizes.
    """
    n_cf = 10**5 if fast else 10**6
    n_mc = 10**4 if fast else 10**5
    n_bif = 10**4 if fast else 10**5
    h_bif = 1e-3 if fast else 1e-4
    suite = []
    for alpha in (0.3, 0.5, 0.7):
        for d in (1, 2):
            suite.append({
                "command": "hk-check", "name": f"hk-iso-a{alpha}-d{d}",
                "measure": {"preset": "isotropic", "d": d, "alpha": alpha},
                "theta": 0.8 * admissible_theta_interval(alpha).corrected[1],
                "expect_satisfied": True,
            })
    suite.append({
        "command": "hk-check", "name": "hk-independent-coordinates",
        "measure": {"preset": "independent_coordinates", "alpha": 0.5},
        "thetas": [0.2, 0.4, 0.6155, 0.7, math.pi / 4],
        "expect_satisfied": False,
    })
    suite.append({
        "command": "hk-check", "name": "hk-lattice",
        "measure": {"preset": "lattice_rays", "alpha": 0.5, "spacing": 0.3},
        "theta": 0.4,
        "expect_satisfied": True,
    })
    suite.append({
        "command": "epsilon0", "name": "epsilon0-baseline",
        "kappa": 2.0 / 3.0, "alpha": 0.5, "theta": 0.2,
        "expect_feasible": True,
    })
    for alpha in (0.3, 0.5, 0.7):
        suite.append({
            "command": "sampler-validate", "name": f"sampler-ray-a{alpha}",
            "measure": {"preset": "standard_1d", "alpha": alpha},
            "method": "ray_sum", "h": 1.0, "n": n_cf,
            "ks_self_similarity": True,
        })
        suite.append({
            "command": "sampler-validate", "name": f"sampler-subord-a{alpha}",
            "measure": {"preset": "standard_isotropic", "d": 2, "alpha": alpha},
            "method": "subordination", "h": 1.0, "n": n_cf,
        })
        suite.append({
            "command": "sampler-validate", "name": f"sampler-cp-a{alpha}",
            "measure": {"preset": "standard_1d", "alpha": alpha},
            "method": "compound_poisson", "cutoff": 0.02, "h": 1.0, "n": n_cf,
        })
    suite.append({
        "command": "resolvent-compare", "name": "resolvent-triangle",
        "alpha": 0.5, "lambda": 1.0, "h": 1e-3, "N": n_mc,
        "comparison_trials": 100,
    })
    suite.append({
        "command": "decay-check", "name": "decay-lemma-bounds",
        "alpha": 0.5, "lambda": 1.0, "epsilon": 0.01,
        "h": 1e-3, "N": 2 * 10**4 if not fast else 4000,
    })
    suite.append({
        "command": "bifurcation", "name": "uniqueness-threshold",
        "alpha": 0.5, "betas": [0.25, 0.75],
        "epsilons": [1e-1, 1e-2, 1e-3, 1e-4],
        "T": 1.0, "h": h_bif, "N": n_bif,
        "expect": {"0.75": "decreasing_below_0.05", "0.25": "floor"},
    })
    return suite
