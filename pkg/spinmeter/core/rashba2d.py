"""Simultaneous measurement of sigma_x and sigma_y by a 2D Rashba pulse.

H = alpha_tilde (k_x sigma_y - k_y sigma_x) for a time T. Each momentum mode
rotates its spin about an in-plane axis, so the exact propagator is

    G(k) = cos(alpha_tilde k T) - i sin(alpha_tilde k T) (k_x sigma_y - k_y sigma_x) / k

On a grid this is applied per mode; in position space it reduces to the
radial Bessel integrals evaluated by ``propagator_elements``.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import constants

from spinmeter.core.qmcore import (
    Grid,
    MeasurementSetup,
    SpinorField,
    SpinState,
    make_gaussian_state,
)
from spinmeter.core.specfun import (
    QuadratureSpec,
    bessel_j,
    damped_oscillatory_integral,
)
from spinmeter.errors import AsymptoticRegimeError, ConfigurationError

log = logging.getLogger("spinmeter.core.rashba2d")

W_OVER_RSO_FLOOR = 1e-3
RING_REGIME_LIMIT = 0.1
MOMENTS_REGIME_LIMIT = 0.05
CONDITION_FACTOR = 10.0


# ───── Types ─────


@dataclass(frozen=True)
class PropagatorSample2D:
    """U(r, phi | T) with Psi(T) = U xi."""

    r: float
    phi: float
    matrix: np.ndarray
    warnings: tuple[str, ...] = field(default_factory=tuple)

    @property
    def u11(self) -> complex:
        return complex(self.matrix[0, 0])

    @property
    def u12(self) -> complex:
        return complex(self.matrix[0, 1])

    def apply(self, spin: SpinState) -> np.ndarray:
        return self.matrix @ spin.spinor


@dataclass(frozen=True)
class RingProfile:
    radii: np.ndarray
    F_values: np.ndarray
    r_so: float
    w: float
    warnings: tuple[str, ...] = field(default_factory=tuple)

    @property
    def peak(self) -> float:
        return float(np.max(np.abs(self.F_values)))

    def extrema(self) -> tuple[float, float]:
        """Radii of the maximum and the minimum of F."""
        return (float(self.radii[np.argmax(self.F_values)]),
                float(self.radii[np.argmin(self.F_values)]))

    def value_at(self, r: float) -> float:
        return float(np.interp(r, self.radii, self.F_values))


@dataclass(frozen=True)
class PointerMoments:
    mean_x: float
    mean_y: float
    mean_x2: float
    mean_y2: float
    expected_mean_x: float
    expected_mean_y: float
    expected_mean_x2: float


@dataclass(frozen=True)
class AccuracyReport:
    cond_speed: bool
    cond_split: bool
    speed_ratio: float
    split_ratio: float

    @property
    def margins(self) -> tuple[float, float]:
        return (self.speed_ratio, self.split_ratio)


# --- Internal ---


def _require_infinite_mass(setup: MeasurementSetup):
    if setup.v_sp != 0:
        raise ConfigurationError("radial propagator needs v_sp = 0")


def _check_floor(setup: MeasurementSetup):
    if setup.r_so > 0 and setup.w_over_rso < W_OVER_RSO_FLOOR:
        raise ConfigurationError(
            f"w/R_so = {setup.w_over_rso:.3g} below {W_OVER_RSO_FLOOR} (near-singular kernel)"
        )


# --- Public API ---


def propagator_elements(r: float, phi: float, setup: MeasurementSetup,
                        spec: QuadratureSpec | None = None) -> PropagatorSample2D:
    """U(r, phi | T) from the radial Bessel integrals."""
    _require_infinite_mass(setup)
    _check_floor(setup)
    if r < 0:
        raise ConfigurationError("r must be non-negative")
    w, R = setup.w, setup.r_so

    if R == 0:
        u11 = math.sqrt(2.0 / math.pi) / w * math.exp(-r * r / (w * w))
        return PropagatorSample2D(r, phi, np.array([[u11, 0], [0, u11]], dtype=complex))

    spec = spec or QuadratureSpec.for_gaussian(w, frequency=R + r)
    pref = w / math.sqrt(2 * math.pi)

    def diag(k):
        return pref * np.exp(-k * k * w * w / 4) * np.cos(R * k) * bessel_j(0, k * r) * k

    def off(k):
        return pref * np.exp(-k * k * w * w / 4) * np.sin(R * k) * bessel_j(1, k * r) * k

    i11 = damped_oscillatory_integral(diag, spec)
    warnings = i11.warnings
    if r == 0:
        i12 = 0.0
    else:
        res = damped_oscillatory_integral(off, spec)
        i12 = res.value.real
        warnings += res.warnings

    u11 = i11.value.real
    u12 = -1j * np.exp(-1j * phi) * i12
    matrix = np.array([[u11, u12], [np.conj(u12), u11]], dtype=complex)
    return PropagatorSample2D(r, phi, matrix, warnings)


def evolve_packet_2d(spin: SpinState, setup: MeasurementSetup, grid: Grid) -> SpinorField:
    """Exact per-mode evolution of the Gaussian packet to t = T."""
    if grid.dimension != 2:
        raise ConfigurationError("rashba2d needs a 2D grid")
    grid.validate_for(setup, reach=setup.r_so, t=setup.T)
    field0 = make_gaussian_state(setup, spin, grid)
    if setup.T == 0:
        return field0

    kx, ky = grid.k_mesh()
    k = np.hypot(kx, ky)
    a = setup.alpha_tilde * setup.T
    c = np.cos(a * k)
    # sin(a k)/k, equal to a at k = 0
    s_over = a * np.sinc(a * k / np.pi)
    phase = np.exp(-0.5j * k * k * setup.T * setup.inverse_mass)

    psi = np.fft.fft2(field0.values, axes=(1, 2))
    out = np.empty_like(psi)
    out[0] = phase * (c * psi[0] + s_over * (-kx + 1j * ky) * psi[1])
    out[1] = phase * (s_over * (kx + 1j * ky) * psi[0] + c * psi[1])
    return SpinorField(grid, np.fft.ifft2(out, axes=(1, 2)), setup.T)


def check_ring_regime(setup: MeasurementSetup) -> None:
    """Raise AsymptoticRegimeError unless w/R_so <= 0.1."""
    ratio = setup.w_over_rso
    if ratio > RING_REGIME_LIMIT:
        raise AsymptoticRegimeError(
            f"ring profile needs w/R_so <= {RING_REGIME_LIMIT}, got {ratio:.3g}"
        )


def ring_profile(setup: MeasurementSetup, radii) -> RingProfile:
    """Asymptotic radial function F(r|T) of the ring for w << R_so.

    F = w/(2 pi sqrt(R)) int e^{-k^2 w^2/4} cos((R - r) k + pi/4) k^{1/2} dk,
    integrated in u = sqrt(k) to remove the endpoint singularity.
    """
    _require_infinite_mass(setup)
    check_ring_regime(setup)
    _check_floor(setup)

    radii = np.asarray(radii, dtype=float)
    w, R = setup.w, setup.r_so
    u_max = math.sqrt(12.0 / w)
    pref = w / (2 * math.pi * math.sqrt(R))

    values = np.empty(radii.shape)
    warnings: list[str] = []
    for i, r in enumerate(radii):
        s = R - r
        rate = 2 * abs(s) * u_max
        width = 0.5 / math.sqrt(w)
        if rate > 0:
            width = min(width, math.pi / rate)
        spec = QuadratureSpec.for_interval(u_max, width)

        def f(u, s=s):
            u2 = u * u
            return 2 * pref * u2 * np.exp(-u2 * u2 * w * w / 4) * np.cos(s * u2 + math.pi / 4)

        res = damped_oscillatory_integral(f, spec)
        values[i] = res.value.real
        warnings.extend(res.warnings)
    return RingProfile(radii, values, R, w, tuple(warnings))


def probability_outside(field: SpinorField, radius: float) -> float:
    """Probability mass at r > radius."""
    x, y = field.grid.mesh()
    outside = np.hypot(x, y) > radius
    return float(np.sum(field.density()[outside]) * field.grid.cell)


def pointer_moments(field: SpinorField, spin0: SpinState,
                    setup: MeasurementSetup) -> PointerMoments:
    """First and second moments of the pointer, with their small-w predictions.

    <x> = R_so <sigma_y(0)>/2, <y> = -R_so <sigma_x(0)>/2, <x^2> = <y^2> = R_so^2/2.
    """
    if setup.v_sp != 0 or setup.w_over_rso > MOMENTS_REGIME_LIMIT:
        log.warning(
            f"pointer moments outside the small-width regime "
            f"(w/R_so={setup.w_over_rso:.3g}, v_sp={setup.v_sp:.3g})"
        )
    x, y = field.grid.mesh()
    rho = field.density()
    cell = field.grid.cell
    s = spin0.bloch()
    R = setup.r_so
    return PointerMoments(
        mean_x=float(np.sum(x * rho) * cell),
        mean_y=float(np.sum(y * rho) * cell),
        mean_x2=float(np.sum(x * x * rho) * cell),
        mean_y2=float(np.sum(y * y * rho) * cell),
        expected_mean_x=R * s[1] / 2,
        expected_mean_y=-R * s[0] / 2,
        expected_mean_x2=R * R / 2,
    )


def accuracy_report(setup: MeasurementSetup) -> AccuracyReport:
    """Precise-measurement conditions alpha >> v_sp and alpha T >> w."""
    speed = setup.alpha / setup.v_sp if setup.v_sp > 0 else math.inf
    split = setup.alpha * setup.T / setup.w
    return AccuracyReport(
        cond_speed=speed >= CONDITION_FACTOR,
        cond_split=split >= CONDITION_FACTOR,
        speed_ratio=speed,
        split_ratio=split,
    )


def setup_from_physical(alpha: float, mass: float, w: float, T: float) -> MeasurementSetup:
    """Setup from SI values: alpha in m/s, mass in kg, w in m, T in s.

    v_sp = hbar / (M w); only ratios of the returned fields are meaningful.
    """
    if mass <= 0:
        raise ConfigurationError("mass must be positive")
    v_sp = constants.hbar / (mass * w)
    return MeasurementSetup(alpha=alpha, w=w, T=T, v_sp=v_sp)
