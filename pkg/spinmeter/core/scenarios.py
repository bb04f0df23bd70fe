"""Scenario orchestration: config in, tables + summary + files out.

Each scenario is a plain function ``(ScenarioConfig) -> ScenarioResult``
registered in ``RUNNERS``. ``run_scenario`` wraps the call with warning
capture and hands the result to the output writers.
"""

import logging
import math

import numpy as np
from scipy.signal import find_peaks

from spinmeter.config import ScenarioConfig
from spinmeter.core import rashba2d, trotter, zeeman1d
from spinmeter.core.formatter import Table
from spinmeter.core.qmcore import (
    Grid,
    MeasurementSetup,
    SpinState,
    observables_of,
)
from spinmeter.output import create_writers
from spinmeter.output.base import Plot, ScenarioResult

log = logging.getLogger("spinmeter.core.scenarios")

NORM_CHECK = 1e-10
MOMENT_TOLERANCE = 0.01
RING_MATCH_TOLERANCE = 0.05
LIMIT_TOLERANCE = 0.01
STEADY_TOLERANCE = 0.02
DRIFT_TOLERANCE = 0.01
ORACLE_TOLERANCE = 1e-12
TROTTER_RATIO = (1.7, 2.3)
MOMENT_STATES = [(b, p) for b in (0.0, math.pi / 2, math.pi) for p in (0.0, math.pi / 2)]


class _WarningCollector(logging.Handler):
    """Keeps WARNING records from spinmeter loggers for the run summary."""

    def __init__(self):
        super().__init__(level=logging.WARNING)
        self.messages: list[str] = []

    def emit(self, record: logging.LogRecord):
        self.messages.append(record.getMessage())


def _tag(value: float) -> str:
    return format(value, "g")


def _common_grid(config: ScenarioConfig, setups: list[MeasurementSetup], t: float) -> Grid:
    """One 1D grid that satisfies the sizing rule for every setup."""
    if config.grid_points and config.grid_extent:
        grid = Grid((config.grid_extent,), (config.grid_points,))
    else:
        extent = config.grid_extent or max(
            Grid.for_setup(s, 1, reach=s.alpha * t, t=t).extent[0] for s in setups
        )
        points = config.grid_points or max(
            Grid.for_setup(s, 1, reach=s.alpha * t, t=t, extent=extent).points[0]
            for s in setups
        )
        grid = Grid((extent,), (points,))
    for s in setups:
        grid.validate_for(s, reach=s.alpha * t, t=t)
    return grid


def _dip_location(x: np.ndarray, rho: np.ndarray) -> float | None:
    """Minimum of the density between its two highest local maxima."""
    peaks, _ = find_peaks(rho, height=1e-3 * rho.max())
    if len(peaks) < 2:
        return None
    a, b = sorted(peaks[np.argsort(rho[peaks])[-2:]])
    return float(x[a + np.argmin(rho[a:b + 1])])


# ───── 2D scenarios ─────


def run_ring_profile(config: ScenarioConfig) -> ScenarioResult:
    setup = config.setup_2d()
    w, R = setup.w, setup.r_so
    radii = np.linspace(max(0.0, R - 20 * w), R + 10 * w, 601)
    profile = rashba2d.ring_profile(setup, radii)

    sample = radii[::10]
    u11 = np.array([rashba2d.propagator_elements(r, 0.0, setup).u11.real for r in sample])
    window = np.abs(sample - R) <= 5 * w
    F_sample = profile.F_values[::10]
    mismatch = float(np.max(np.abs(F_sample[window] - u11[window])) / np.max(np.abs(u11[window])))

    r_max, r_min = profile.extrema()
    outside, inside = abs(profile.value_at(R + 5 * w)), abs(profile.value_at(R - 5 * w))
    report = rashba2d.accuracy_report(setup)

    result = ScenarioResult("ring_profile")
    result.tables.append(Table.from_columns("profile", [
        ("r_over_rso", "1", radii / R),
        ("F", "R_so^-1", profile.F_values),
    ]))
    result.tables.append(Table.from_columns("full_integral", [
        ("r_over_rso", "1", sample / R),
        ("U11", "R_so^-1", u11),
        ("F", "R_so^-1", F_sample),
    ]))
    result.plots.append(Plot("profile", "profile", "r_over_rso", ("F",),
                             xlabel="r / R_so", ylabel="F(r|T)",
                             title=f"w/R_so = {_tag(config.w_over_rso)}"))
    result.summary = {
        "w_over_rso": config.w_over_rso,
        "r_max_over_rso": r_max / R,
        "r_min_over_rso": r_min / R,
        "peak": profile.peak,
        "relative_mismatch_full_integral": mismatch,
        "abs_F_outside_5w": outside,
        "abs_F_inside_5w": inside,
        "accuracy": vars(report),
    }
    result.checks = {
        "extrema_within_3w": abs(r_max - R) <= 3 * w and abs(r_min - R) <= 3 * w,
        "decays_faster_outside": outside < inside,
        "matches_full_integral": mismatch <= RING_MATCH_TOLERANCE,
    }
    return result


def run_moments_2d(config: ScenarioConfig) -> ScenarioResult:
    setup = config.setup_2d()
    R = setup.r_so
    grid = Grid.for_setup(setup, 2, reach=R, points=config.grid_points,
                          extent=config.grid_extent)
    rows, norms, leaks = [], [], []
    for beta, phi in MOMENT_STATES:
        spin = SpinState(beta, phi)
        field = rashba2d.evolve_packet_2d(spin, setup, grid)
        m = rashba2d.pointer_moments(field, spin, setup)
        norms.append(abs(field.norm() - 1))
        leaks.append(rashba2d.probability_outside(field, R + 6 * setup.w))
        rows.append((beta, phi, m.mean_x, m.mean_y, m.mean_x2, m.mean_y2,
                     m.expected_mean_x, m.expected_mean_y, m.expected_mean_x2))
    data = np.array(rows)
    labels = ("beta", "phi", "mean_x", "mean_y", "mean_x2", "mean_y2",
              "expected_mean_x", "expected_mean_y", "expected_mean_x2")
    units = ("rad", "rad", "R_so", "R_so", "R_so^2", "R_so^2", "R_so", "R_so", "R_so^2")

    first = np.max(np.abs(data[:, 2:4] - data[:, 6:8]))
    second = np.max(np.abs(data[:, 4:6] - data[:, 8:9]) / data[:, 8:9])
    result = ScenarioResult("moments_2d")
    result.tables.append(Table("moments", tuple(zip(labels, units)), data))
    result.summary = {
        "w_over_rso": config.w_over_rso,
        "grid_points": grid.points[0],
        "max_first_moment_error_over_rso": float(first / R),
        "max_second_moment_relative_error": float(second),
        "max_norm_error": max(norms),
        "max_probability_outside": max(leaks),
        "accuracy": vars(rashba2d.accuracy_report(setup)),
    }
    result.checks = {
        "first_moments": first <= MOMENT_TOLERANCE * R / 2,
        "second_moments": second <= MOMENT_TOLERANCE,
        "norm": max(norms) <= NORM_CHECK,
        "confined": max(leaks) < 1e-3,
    }
    return result


# ───── 1D scenarios ─────


def run_density_1d(config: ScenarioConfig) -> ScenarioResult:
    t = config.t
    setups = [config.setup_1d(w=w) for w in config.widths]
    grid = _common_grid(config, setups, t)
    (x,) = grid.axes()
    columns = [("x", "alpha/delta_tilde", x)]
    dips, norms, fields = {}, [], []
    for w, setup in zip(config.widths, setups):
        field = zeeman1d.evolve_packet_1d(config.spin(), setup, grid, t)
        fields.append(field)
        rho = field.density()
        norms.append(abs(field.norm() - 1))
        dips[_tag(w)] = _dip_location(x, rho)
        columns.append((f"density_w{_tag(w)}", "delta_tilde/alpha", rho))
    for w, setup, field in zip(config.widths, setups, fields):
        columns.append((f"velocity_w{_tag(w)}", "alpha", zeeman1d.local_velocity(field, setup)))

    result = ScenarioResult("density_1d")
    result.tables.append(Table.from_columns("density", columns))
    result.plots.append(Plot("density", "density", "x",
                             tuple(f"density_w{_tag(w)}" for w in config.widths),
                             xlabel="x", ylabel="density", title=f"t = {_tag(t)}"))
    result.summary = {"t": t, "dip_location": dips, "max_norm_error": max(norms)}
    result.checks = {"norm": max(norms) <= NORM_CHECK}
    return result


def run_spread_1d(config: ScenarioConfig) -> ScenarioResult:
    t = config.t
    setups = [config.setup_1d(v_sp=v) for v in config.spread_speeds]
    grid = _common_grid(config, setups, t)
    (x,) = grid.axes()
    columns = [("x", "alpha/delta_tilde", x)]
    stats, norms = {}, []
    for v, setup in zip(config.spread_speeds, setups):
        field = zeeman1d.evolve_packet_1d(config.spin(), setup, grid, t)
        obs = observables_of(field, setup)
        norms.append(abs(field.norm() - 1))
        stats[_tag(v)] = {"mean_x": obs.mean_x, "width": obs.width_w_t, "sigma_x": obs.sigma_x}
        columns.append((f"density_v{_tag(v)}", "delta_tilde/alpha", field.density()))
        columns.append((f"sigma_x_density_v{_tag(v)}", "delta_tilde/alpha", field.spin_density(0)))

    result = ScenarioResult("spread_1d")
    result.tables.append(Table.from_columns("spread", columns))
    result.plots.append(Plot("density", "spread", "x",
                             tuple(f"density_v{_tag(v)}" for v in config.spread_speeds),
                             xlabel="x", ylabel="density", title=f"t = {_tag(t)}"))
    result.plots.append(Plot("sigma_x", "spread", "x",
                             tuple(f"sigma_x_density_v{_tag(v)}" for v in config.spread_speeds),
                             xlabel="x", ylabel="sigma_x density"))
    result.summary = {"t": t, "w": config.w, "by_spread_speed": stats,
                      "max_norm_error": max(norms)}
    result.checks = {"norm": max(norms) <= NORM_CHECK}
    return result


def run_trajectory_1d(config: ScenarioConfig) -> ScenarioResult:
    times = config.time_grid()
    t_max = times[-1]
    spin = config.spin()
    columns = [("t", "1/delta_tilde", np.array(times))]
    per_width, checks = {}, {}
    for w in config.widths:
        setup = config.setup_1d(w=w, t=t_max)
        grid = _common_grid(config, [setup], t_max)
        series = zeeman1d.time_series(spin, setup, grid, times)
        width = series.column("width_w_t")
        tag = _tag(w)
        for name, unit in (("mean_x", "alpha/delta_tilde"), ("width_w_t", "alpha/delta_tilde"),
                           ("sigma_x", "1"), ("sigma_y", "1"), ("sigma_z", "1"),
                           ("sigma_parallel", "1"), ("sigma_perp", "1"), ("purity", "1")):
            columns.append((f"{name}_w{tag}", unit, series.column(name)))

        slope = zeeman1d.short_time_slope(series)
        residual = zeeman1d.velocity_spin_residual(series, setup)
        purity = series.column("purity")
        growth_pi = float(np.interp(math.pi, series.t, width)) / width[0] - 1
        growth_short = float(np.interp(zeeman1d.SHORT_TIME, series.t, width)) / width[0] - 1
        expected_slope = setup.alpha * math.cos(spin.beta)
        per_width[tag] = {
            "short_time_slope": slope,
            "velocity_spin_residual": residual,
            "width_growth_at_pi": growth_pi,
            "width_growth_at_short_time": growth_short,
            "max_purity": float(purity.max()),
            "min_purity": float(purity.min()),
        }
        checks[f"slope_w{tag}"] = abs(slope - expected_slope) <= 0.01 * setup.alpha
        checks[f"velocity_spin_w{tag}"] = residual <= 1e-3 * setup.alpha
        checks[f"purity_w{tag}"] = bool(purity.max() <= 1 + 1e-10 and purity.min() >= 0.5 - 1e-10)
        if w == 1.0:
            checks["broadening_near_pi"] = growth_pi > 0.05 and growth_short < 0.01

    tags = [_tag(w) for w in config.widths]
    result = ScenarioResult("trajectory_1d")
    result.tables.append(Table.from_columns("trajectory", columns))
    result.plots.append(Plot("mean_x", "trajectory", "t", tuple(f"mean_x_w{g}" for g in tags),
                             xlabel="t", ylabel="<x(t)>"))
    result.plots.append(Plot("width", "trajectory", "t", tuple(f"width_w_t_w{g}" for g in tags),
                             xlabel="t", ylabel="w(t)"))
    result.summary = {"by_width": per_width}
    result.checks = checks
    return result


def run_spiral_1d(config: ScenarioConfig) -> ScenarioResult:
    times = np.array(config.time_grid())
    spin = config.spin()
    window = config.tail_window
    columns = [("t", "1/delta_tilde", times)]
    per_width, checks, displacements = {}, {}, []
    result = ScenarioResult("spiral_1d")
    for w in sorted(config.widths):
        setup = config.setup_1d(w=w, t=float(times[-1]))
        s, _ = zeeman1d.spin_expectations(spin, setup, times)
        ct, st = math.cos(setup.theta), math.sin(setup.theta)
        sy = s[:, 1]
        par = s[:, 2] * ct + s[:, 0] * st
        perp = s[:, 2] * st - s[:, 0] * ct
        tag = _tag(w)
        columns += [(f"sigma_y_w{tag}", "1", sy), (f"sigma_perp_w{tag}", "1", perp),
                    (f"sigma_parallel_w{tag}", "1", par)]

        metrics = zeeman1d.spiral_metrics(times, sy, perp, window)
        asym = zeeman1d.asymptotic_spin(spin, setup)
        tail_par = zeeman1d.tail_average(times, par, window)
        tail_perp = zeeman1d.tail_average(times, perp, window)
        tail_y = zeeman1d.tail_average(times, sy, window)
        mid = 0.5 * (window[0] + window[1])
        drift = max(
            abs(zeeman1d.tail_average(times, v, (window[0], mid))
                - zeeman1d.tail_average(times, v, (mid, window[1])))
            for v in (par, perp)
        )
        displacements.append(metrics.displacement)
        per_width[tag] = {
            "fixed_point": metrics.fixed_point,
            "displacement": metrics.displacement,
            "max_radius": metrics.max_radius,
            "early_radius": metrics.early_radius,
            "late_radius": metrics.late_radius,
            "tail_sigma_y": tail_y,
            "tail_sigma_parallel": tail_par,
            "tail_sigma_perp": tail_perp,
            "tail_drift": drift,
            "asymptotic_sigma_parallel": asym.sigma_parallel_inf,
            "asymptotic_sigma_perp": asym.sigma_perp_inf,
        }
        checks[f"inward_w{tag}"] = metrics.inward
        checks[f"sigma_y_steady_w{tag}"] = abs(tail_y) < STEADY_TOLERANCE
        checks[f"asymptote_w{tag}"] = (abs(tail_par - asym.sigma_parallel_inf) <= STEADY_TOLERANCE
                                       and abs(tail_perp - asym.sigma_perp_inf) <= STEADY_TOLERANCE)
        checks[f"drift_w{tag}"] = drift < DRIFT_TOLERANCE
        result.plots.append(Plot(f"spiral_w{tag}", "spiral", f"sigma_y_w{tag}",
                                 (f"sigma_perp_w{tag}",), xlabel="<sigma_y>",
                                 ylabel="<sigma_perp>", title=f"w = {tag}"))
    checks["displacement_grows_with_w"] = bool(np.all(np.diff(displacements) > 0))

    result.tables.append(Table.from_columns("spiral", columns))
    result.summary = {"tail_window": list(window), "by_width": per_width}
    result.checks = checks
    return result


def run_asymptotics(config: ScenarioConfig) -> ScenarioResult:
    spin = config.spin()
    base = config.setup_1d()
    ratios = np.logspace(-2, 2, 41)
    st = math.sin(base.theta)
    dt = base.delta_tilde if base.delta_tilde > 0 else base.delta
    par, perp = [], []
    for ratio in ratios:
        setup = base.replace(w=ratio * base.alpha / dt)
        a = zeeman1d.asymptotic_spin(spin, setup)
        par.append(a.sigma_parallel_inf)
        perp.append(a.sigma_perp_inf)
    ct, cb, sb = math.cos(base.theta), math.cos(spin.beta), math.sin(spin.beta)
    weak = ct * cb + st * math.cos(spin.phi) * sb
    strong_par, strong_perp = ct * cb, st * cb

    result = ScenarioResult("asymptotics")
    result.tables.append(Table.from_columns("asymptotics", [
        ("coupling_ratio_tilde", "1", ratios),
        ("sigma_parallel_inf", "1", np.array(par)),
        ("sigma_perp_inf", "1", np.array(perp)),
    ]))
    result.plots.append(Plot("asymptotics", "asymptotics", "coupling_ratio_tilde",
                             ("sigma_parallel_inf", "sigma_perp_inf"),
                             xlabel="w delta_tilde / alpha", ylabel="steady spin"))
    result.summary = {
        "theta": base.theta,
        "strong_limit": {"sigma_parallel": strong_par, "sigma_perp": strong_perp},
        "weak_limit": {"sigma_parallel": weak},
        "strong_value": {"sigma_parallel": par[0], "sigma_perp": perp[0]},
        "weak_value": {"sigma_parallel": par[-1], "sigma_perp": perp[-1]},
    }
    result.checks = {
        "strong_limit": (abs(par[0] - strong_par) <= LIMIT_TOLERANCE
                         and abs(perp[0] - strong_perp) <= LIMIT_TOLERANCE),
        "weak_limit": abs(par[-1] - weak) <= LIMIT_TOLERANCE,
    }
    return result


def run_trotter_check(config: ScenarioConfig) -> ScenarioResult:
    t = config.t
    spin = config.spin()
    setup = config.setup_1d(t=t)
    k = np.linspace(-6.0, 6.0, 49)

    oracle = {}
    for L in (8, 12):
        paths = trotter.enumerate_paths_1d(L, setup)
        diff = np.abs(trotter.path_sum_propagator(paths, k)
                      - trotter.split_mode_propagator_1d(L, k, t, setup))
        oracle[str(L)] = float(diff.max())

    distribution = trotter.displacement_distribution(12, setup, spin)
    scaled = trotter.displacement_distribution(
        12, setup.replace(T=t / 2, alpha=2 * setup.alpha, delta=2 * setup.delta), spin)
    scale_gap = max(abs(p - q) for p, q in zip(distribution.values(), scaled.values()))

    grid = _common_grid(config, [setup], t)
    rows = trotter.trotter_convergence_1d(config.trotter_steps, setup, spin, grid, t)
    commuting = trotter.trotter_convergence_1d(
        config.trotter_steps[:1], setup.replace(theta=0.0), spin, grid, t)

    ring = MeasurementSetup.ring(0.25)
    ring_grid = Grid.for_setup(ring, 2, reach=ring.r_so)
    rows_2d = trotter.trotter_convergence_2d([32, 64, 128, 256], ring, spin, ring_grid)

    def table(name, rs):
        return Table.from_columns(name, [
            ("L", "1", np.array([r.L for r in rs], dtype=float)),
            ("error", "1", np.array([r.error for r in rs])),
            ("ratio", "1", np.array([np.nan if r.ratio is None else r.ratio for r in rs])),
        ])

    result = ScenarioResult("trotter_check")
    result.tables += [table("convergence", rows), table("convergence_2d", rows_2d)]
    result.tables.append(Table.from_columns("displacements", [
        ("displacement", "alpha/delta_tilde", np.array(list(distribution))),
        ("probability", "1", np.array(list(distribution.values()))),
    ]))
    result.summary = {
        "path_sum_vs_product": oracle,
        "distribution_total": float(sum(distribution.values())),
        "scale_invariance_gap": scale_gap,
        "commuting_error": commuting[0].error,
        "ratios": {str(r.L): r.ratio for r in rows if r.ratio is not None},
        "ratios_2d": {str(r.L): r.ratio for r in rows_2d if r.ratio is not None},
    }
    ratio_128 = next((r.ratio for r in rows if r.L == 128 and r.ratio is not None), None)
    result.checks = {
        "path_sum_equals_product": max(oracle.values()) <= ORACLE_TOLERANCE,
        "distribution_normalised": abs(sum(distribution.values()) - 1) <= 1e-10,
        "scale_invariant": scale_gap <= 1e-12,
        "commuting_split_exact": commuting[0].error <= 1e-10,
    }
    if ratio_128 is not None:
        result.checks["first_order_rate"] = TROTTER_RATIO[0] <= ratio_128 <= TROTTER_RATIO[1]
    return result


# Registry of scenario name → runner.
RUNNERS = {
    "ring_profile": run_ring_profile,
    "density_1d": run_density_1d,
    "spread_1d": run_spread_1d,
    "trajectory_1d": run_trajectory_1d,
    "spiral_1d": run_spiral_1d,
    "asymptotics": run_asymptotics,
    "trotter_check": run_trotter_check,
    "moments_2d": run_moments_2d,
}


def run_scenario(config: ScenarioConfig, write: bool = True) -> ScenarioResult:
    """Run one scenario; write its files unless ``write`` is False."""
    runner = RUNNERS[config.scenario]
    collector = _WarningCollector()
    root = logging.getLogger("spinmeter")
    root.addHandler(collector)
    try:
        log.info(f"running scenario {config.scenario}")
        result = runner(config)
    finally:
        root.removeHandler(collector)

    result.warnings.extend(collector.messages)
    result.summary["config"] = config.echo()
    for name, ok in result.checks.items():
        if not ok:
            log.warning(f"{config.scenario}: check '{name}' failed")

    if write:
        for writer in create_writers(config.formats, config.output_dir):
            result.files.extend(writer.write(result))
        log.info(f"wrote {len(result.files)} file(s) to {config.output_dir}")
    return result
