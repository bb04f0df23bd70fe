"""1D measurement of sigma_z under spin-orbit coupling plus a Zeeman field.

H(k) = k^2/2M + alpha k sigma_z + (delta/2)(b . sigma), b = (sin theta, 0, cos theta).
Every momentum mode evolves independently, so production evolution is an
exact 2x2 exponential per mode on the FFT grid. The Green function is
evaluated by separate k-quadrature and only used for cross-checks.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from spinmeter.core.qmcore import (
    Grid,
    MeasurementSetup,
    ObservableSet,
    SpinorField,
    SpinState,
    free_packet,
    make_gaussian_state,
    observables_of,
)
from spinmeter.core.specfun import (
    QuadratureSpec,
    damped_oscillatory_integral,
    gaussian_weighted_integral,
    quadrature_rule,
)
from spinmeter.errors import ConfigurationError

log = logging.getLogger("spinmeter.core.zeeman1d")

DENSITY_FLOOR = 1e-12
SINGULAR_SIN_THETA = 1e-6
TAIL_WINDOW = (150.0, 200.0)
SHORT_TIME = 0.3
CONTINUITY_MAX_STEP = 1e-3


# ───── Types ─────


@dataclass(frozen=True)
class ModeKernelParams:
    gamma: float
    q: float
    delta_tilde: float
    C: float
    S: float

    @classmethod
    def from_mode(cls, k: float, t: float, setup: MeasurementSetup) -> "ModeKernelParams":
        q_alpha = 2 * setup.alpha * k + setup.delta * math.cos(setup.theta)
        omega = math.hypot(q_alpha, setup.delta_tilde)
        return cls(
            gamma=setup.gamma,
            q=2 * k + setup.gamma,
            delta_tilde=setup.delta_tilde,
            C=math.cos(t * omega / 2),
            S=math.sin(t * omega / 2),
        )


@dataclass(frozen=True)
class GreenSample1D:
    """Green function at (x, t), resolved by the initial Gaussian envelope."""

    x: float
    t: float
    matrix: np.ndarray
    warnings: tuple[str, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class TimeSeries:
    times: tuple[float, ...]
    records: tuple[ObservableSet, ...]

    def __post_init__(self):
        if len(self.times) != len(self.records):
            raise ConfigurationError("times and records differ in length")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ConfigurationError("times must be strictly increasing")

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    @property
    def t(self) -> np.ndarray:
        return np.asarray(self.times, dtype=float)


@dataclass(frozen=True)
class AsymptoticSpin:
    sigma_parallel_inf: float
    sigma_perp_inf: float
    sigma_y_inf: float = 0.0
    warnings: tuple[str, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class SpiralMetrics:
    """Shape of the (<sigma_y>, <sigma_perp>) trajectory."""

    initial_point: tuple[float, float]
    fixed_point: tuple[float, float]
    displacement: float
    max_radius: float
    early_radius: float
    late_radius: float

    @property
    def inward(self) -> bool:
        return self.late_radius < self.early_radius


# ───── Mode propagator ─────


def mode_propagator(k, t: float, setup: MeasurementSetup) -> np.ndarray:
    """exp(-i t H(k)) for scalar or array k; shape (*k.shape, 2, 2)."""
    k = np.asarray(k, dtype=float)
    q_alpha = 2 * setup.alpha * k + setup.delta * math.cos(setup.theta)
    dt = setup.delta_tilde
    omega = np.hypot(q_alpha, dt)
    C = np.cos(t * omega / 2)
    # sin(t omega/2)/omega, finite at omega = 0
    s_over = (t / 2) * np.sinc(t * omega / (2 * np.pi))
    phase = np.exp(-0.5j * k * k * t * setup.inverse_mass)

    U = np.empty(k.shape + (2, 2), dtype=complex)
    U[..., 0, 0] = phase * (C - 1j * q_alpha * s_over)
    U[..., 1, 1] = phase * (C + 1j * q_alpha * s_over)
    U[..., 0, 1] = phase * (-1j * dt * s_over)
    U[..., 1, 0] = U[..., 0, 1]
    return U


def _gaussian_k(k, w: float) -> np.ndarray:
    return math.sqrt(2 * math.sqrt(math.pi) * w) * np.exp(-k * k * w * w / 2)


# ───── Green function and closed forms ─────


def green_function(x: float, t: float, setup: MeasurementSetup,
                   spec: QuadratureSpec | None = None) -> GreenSample1D:
    """G(x|t) applied to the Gaussian envelope, by direct k-quadrature."""
    if t < 0:
        raise ConfigurationError("t must be non-negative")
    w = setup.w
    if spec is None:
        K = 12.0 / w
        frequency = abs(x) + setup.alpha * t + K * t * setup.inverse_mass
        spec = QuadratureSpec.for_gaussian(w, frequency=frequency)

    def element(i, j):
        def f(k):
            U = mode_propagator(k, t, setup)
            return U[..., i, j] * _gaussian_k(k, w) * np.exp(1j * k * x) / (2 * np.pi)
        return damped_oscillatory_integral(f, spec, symmetric=True)

    g11, g22, g12 = element(0, 0), element(1, 1), element(0, 1)
    matrix = np.array([[g11.value, g12.value], [g12.value, g22.value]])
    warnings = g11.warnings + g22.warnings + g12.warnings
    return GreenSample1D(float(x), float(t), matrix, warnings)


def theta_zero_reference(x, t: float, setup: MeasurementSetup) -> np.ndarray:
    """Closed-form envelope-resolved G for a field along z."""
    if abs(math.sin(setup.theta)) > SINGULAR_SIN_THETA:
        raise ConfigurationError("theta_zero_reference needs the field along z")
    zeeman = setup.delta * math.cos(setup.theta) * t / 2
    a = setup.alpha * t
    out = np.zeros(np.shape(x) + (2, 2), dtype=complex)
    out[..., 0, 0] = np.exp(-1j * zeeman) * free_packet(np.asarray(x) - a, t, setup)
    out[..., 1, 1] = np.exp(1j * zeeman) * free_packet(np.asarray(x) + a, t, setup)
    return out


def zero_soc_reference(x, t: float, setup: MeasurementSetup) -> np.ndarray:
    """Closed-form envelope-resolved G without spin-orbit coupling."""
    if setup.alpha != 0:
        raise ConfigurationError("zero_soc_reference needs alpha = 0")
    b = setup.field_direction
    c, s = math.cos(setup.delta * t / 2), math.sin(setup.delta * t / 2)
    larmor = np.array([
        [c - 1j * s * b[2], -1j * s * b[0]],
        [-1j * s * b[0], c + 1j * s * b[2]],
    ])
    g0 = free_packet(x, t, setup)
    return np.asarray(g0)[..., None, None] * larmor


# ───── Grid evolution ─────


def _evolver(spin: SpinState, setup: MeasurementSetup, grid: Grid):
    if grid.dimension != 1:
        raise ConfigurationError("zeeman1d needs a 1D grid")
    field0 = make_gaussian_state(setup, spin, grid)
    psi_k = np.fft.fft(field0.values, axis=-1)
    (k,) = grid.k_axes()

    def at(t: float) -> SpinorField:
        if t == 0:
            return field0
        U = mode_propagator(k, t, setup)
        out = np.einsum("kij,jk->ik", U, psi_k)
        return SpinorField(grid, np.fft.ifft(out, axis=-1), t)

    return at


def evolve_packet_1d(spin: SpinState, setup: MeasurementSetup, grid: Grid,
                     t: float) -> SpinorField:
    """Exact evolution of the Gaussian packet to time t."""
    if t < 0:
        raise ConfigurationError("t must be non-negative")
    grid.validate_for(setup, reach=setup.alpha * t, t=t)
    return _evolver(spin, setup, grid)(t)


def local_velocity(field: SpinorField, setup: MeasurementSetup) -> np.ndarray:
    """alpha Psi^+ sigma_z Psi / Psi^+ Psi; NaN where the density is below the floor."""
    rho = field.density()
    sz = field.spin_density(2)
    v = np.full(rho.shape, np.nan)
    ok = rho > DENSITY_FLOOR
    v[ok] = setup.alpha * sz[ok] / rho[ok]
    return v


def time_series(spin: SpinState, setup: MeasurementSetup, grid: Grid, times) -> TimeSeries:
    times = tuple(float(t) for t in times)
    if not times:
        raise ConfigurationError("times must not be empty")
    if times[0] < 0:
        raise ConfigurationError("times must be non-negative")
    t_max = max(times)
    grid.validate_for(setup, reach=setup.alpha * t_max, t=t_max)
    at = _evolver(spin, setup, grid)
    records = tuple(observables_of(at(t), setup) for t in times)
    log.debug(f"time series: {len(times)} samples up to t={t_max:.6g}")
    return TimeSeries(times, records)


# ───── Spin expectations from momentum space ─────


def spin_expectations(spin: SpinState, setup: MeasurementSetup, times,
                      tolerance: float = 1e-9) -> tuple[np.ndarray, tuple[str, ...]]:
    """Exact <sigma_x,y,z>(t) by k-quadrature; returns (array (n, 3), warnings).

    Each mode precesses on its own, so no position grid is needed.
    """
    times = np.asarray(times, dtype=float)
    w = setup.w
    xi = spin.spinor
    t_max = float(times.max()) if times.size else 0.0
    rate = 2 * setup.alpha * t_max
    width = min(1.0 / w, math.pi / rate) if rate > 0 else 1.0 / w
    # |psi0(k)|^2 = 2 sqrt(pi) w e^{-k^2 w^2} is below e^{-36} past 6/w
    spec = QuadratureSpec.for_interval(6.0 / w, width, tolerance)

    def spin_density(k, t):
        psi = mode_propagator(k, t, setup) @ xi
        a, b = psi[..., 0], psi[..., 1]
        weight = w * np.exp(-k * k * w * w) / math.sqrt(math.pi)
        cross = np.conj(a) * b
        return weight * np.stack([2 * cross.real, 2 * cross.imag,
                                  np.abs(a) ** 2 - np.abs(b) ** 2])

    warnings: list[str] = []
    nodes = spec.nodes
    for axis in range(3):
        res = damped_oscillatory_integral(lambda k: spin_density(k, t_max)[axis], spec,
                                          symmetric=True)
        warnings.extend(res.warnings)
        nodes = max(nodes, res.nodes // 2)

    accepted = QuadratureSpec(nodes, spec.cutoff, spec.tolerance, spec.order)
    k, weights = quadrature_rule(accepted, symmetric=True)
    out = np.empty((times.size, 3))
    for i, t in enumerate(times):
        out[i] = spin_density(k, t) @ weights
    return out, tuple(warnings)


def asymptotic_spin(spin: SpinState, setup: MeasurementSetup) -> AsymptoticSpin:
    """Steady-state sigma_parallel and sigma_perp after dephasing of all modes."""
    theta = setup.theta
    beta, phi = spin.beta, spin.phi
    st, ct = math.sin(theta), math.cos(theta)
    sb, cb = math.sin(beta), math.cos(beta)
    s0 = spin.bloch()

    if setup.alpha == 0:
        # no pointer coupling: precession about b averages to the projection on b
        return AsymptoticSpin(float(s0 @ setup.field_direction), 0.0)
    if setup.delta == 0:
        return AsymptoticSpin(cb * ct, cb * st)
    if abs(st) < SINGULAR_SIN_THETA:
        return AsymptoticSpin(cb * ct, cb * st)

    w_eff = setup.coupling_ratio
    spec = QuadratureSpec.for_gaussian(w_eff, scale=st)
    norm = w_eff / (2 * math.sqrt(math.pi))

    def along_n(q):
        return sb * math.cos(phi) * st + cb * (q + ct)

    def denom(q):
        return (q + ct) ** 2 + st * st

    par = gaussian_weighted_integral(
        lambda q: norm * along_n(q) * (1 + q * ct) / denom(q), w_eff, spec)
    perp = gaussian_weighted_integral(
        lambda q: norm * along_n(q) * q * st / denom(q), w_eff, spec)
    return AsymptoticSpin(par.value.real, perp.value.real, 0.0,
                          par.warnings + perp.warnings)


# ───── Diagnostics ─────


def continuity_residual(before: SpinorField, current: SpinorField, after: SpinorField,
                        setup: MeasurementSetup) -> float:
    """max_x |d rho/dt + d j/dx| with j = alpha Psi^+ sigma_z Psi."""
    if setup.v_sp != 0:
        raise ConfigurationError("continuity residual needs v_sp = 0")
    dt = (after.t - before.t) / 2
    if dt <= 0:
        raise ConfigurationError("snapshots must be in increasing time order")
    if abs((current.t - before.t) - (after.t - current.t)) > 1e-9 * max(1.0, abs(after.t)):
        raise ConfigurationError(
            f"middle snapshot t={current.t:.12g} is not halfway between "
            f"{before.t:.12g} and {after.t:.12g}"
        )
    if dt > CONTINUITY_MAX_STEP * (1 + 1e-6):
        raise ConfigurationError(f"snapshot spacing {dt:.3g} above {CONTINUITY_MAX_STEP}")
    drho = (after.density() - before.density()) / (2 * dt)
    j = setup.alpha * current.spin_density(2)
    (k,) = current.grid.k_axes()
    dj = np.fft.ifft(1j * k * np.fft.fft(j)).real
    return float(np.max(np.abs(drho + dj)))


def velocity_spin_residual(series: TimeSeries, setup: MeasurementSetup) -> float:
    """max_t |d<x>/dt - alpha <sigma_z>| with second-order differences."""
    x = series.column("mean_x")
    v = np.gradient(x, series.t, edge_order=2)
    return float(np.max(np.abs(v - setup.alpha * series.column("sigma_z"))))


def short_time_slope(series: TimeSeries, t_max: float = SHORT_TIME) -> float:
    """Linear coefficient of a cubic fit of <x(t)> on [0, t_max]."""
    t = series.t
    mask = t <= t_max + 1e-12
    if mask.sum() < 5:
        raise ConfigurationError(f"need at least 5 samples in [0, {t_max}]")
    coeffs = np.polyfit(t[mask], series.column("mean_x")[mask], 3)
    return float(coeffs[-2])


def tail_average(times, values, window: tuple[float, float] = TAIL_WINDOW) -> float:
    times = np.asarray(times, dtype=float)
    mask = (times >= window[0]) & (times <= window[1])
    if not mask.any():
        raise ConfigurationError(f"no samples inside tail window {window}")
    return float(np.mean(np.asarray(values)[mask]))


def spiral_metrics(times, sigma_y, sigma_perp,
                   window: tuple[float, float] = TAIL_WINDOW) -> SpiralMetrics:
    times = np.asarray(times, dtype=float)
    sy, sp = np.asarray(sigma_y, dtype=float), np.asarray(sigma_perp, dtype=float)
    fixed = (tail_average(times, sy, window), tail_average(times, sp, window))
    radius = np.hypot(sy - fixed[0], sp - fixed[1])
    quarter = max(len(times) // 4, 1)
    initial = (float(sy[0]), float(sp[0]))
    return SpiralMetrics(
        initial_point=initial,
        fixed_point=fixed,
        displacement=math.hypot(fixed[0] - initial[0], fixed[1] - initial[1]),
        max_radius=float(radius.max()),
        early_radius=float(radius[:quarter].mean()),
        late_radius=float(radius[-quarter:].mean()),
    )
