"""Domain types, grids and observables shared by the evolution engines.

Units: hbar = 1. The 1D engine measures time in 1/delta_tilde and length in
alpha/delta_tilde; the 2D engine measures lengths relative to R_so, so only
the ratio w/R_so matters at infinite mass.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass

import numpy as np

from spinmeter.errors import ConfigurationError, InvalidStateError

log = logging.getLogger("spinmeter.core.qmcore")

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)

# Grid sizing: k_max >= CUTOFF_FACTOR / w, padding PADDING_WIDTHS * w_t
CUTOFF_FACTOR = 8.0
PADDING_WIDTHS = 8.0
MIN_POINTS = 64
MAX_POINTS = 1 << 16

NORM_TOLERANCE = 1e-6
TRACE_TOLERANCE = 1e-10
HERMITIAN_TOLERANCE = 1e-12


# ───── Spin states and setups ─────


@dataclass(frozen=True)
class SpinState:
    """Initial spinor (cos(beta/2) e^{i phi}, sin(beta/2))."""

    beta: float
    phi: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.beta) and math.isfinite(self.phi)):
            raise ConfigurationError("spin angles must be finite")

    @property
    def spinor(self) -> np.ndarray:
        return np.array(
            [math.cos(self.beta / 2) * np.exp(1j * self.phi), math.sin(self.beta / 2)],
            dtype=complex,
        )

    def bloch(self) -> np.ndarray:
        """(<sigma_x>, <sigma_y>, <sigma_z>) of the bare spinor."""
        xi = self.spinor
        return np.array([np.vdot(xi, s @ xi).real for s in PAULI])


def rotate_spin(spin: SpinState, chi: float) -> SpinState:
    """Rotate the spinor about z by chi (phi -> phi + chi)."""
    return SpinState(spin.beta, spin.phi + chi)


@dataclass(frozen=True)
class MeasurementSetup:
    """Physical parameters of one SOC pulse.

    ``v_sp`` = 1/(wM); zero means infinite mass.
    """

    alpha: float = 1.0
    delta: float = 0.0
    theta: float = 0.0
    w: float = 1.0
    T: float = 1.0
    v_sp: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "delta", "theta", "w", "T", "v_sp"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigurationError(f"{name} must be finite")
        if self.w <= 0:
            raise ConfigurationError("w must be positive")
        if self.T < 0:
            raise ConfigurationError("T must be non-negative")
        if self.v_sp < 0:
            raise ConfigurationError("v_sp must be non-negative")
        if self.alpha < 0:
            raise ConfigurationError("alpha must be non-negative")
        if self.delta < 0:
            raise ConfigurationError("delta must be non-negative")
        if not 0.0 <= self.theta <= math.pi:
            raise ConfigurationError("theta must lie in [0, pi]")

    # --- Derived quantities ---

    @property
    def alpha_tilde(self) -> float:
        return self.alpha / math.sqrt(2.0)

    @property
    def r_so(self) -> float:
        return self.alpha_tilde * self.T

    @property
    def delta_tilde(self) -> float:
        return self.delta * math.sin(self.theta)

    @property
    def gamma(self) -> float:
        """delta cos(theta) / alpha; infinite when alpha = 0."""
        if self.alpha == 0:
            return math.inf
        return self.delta * math.cos(self.theta) / self.alpha

    @property
    def field_direction(self) -> np.ndarray:
        return np.array([math.sin(self.theta), 0.0, math.cos(self.theta)])

    @property
    def inverse_mass(self) -> float:
        return self.v_sp * self.w

    @property
    def w_over_rso(self) -> float:
        return self.w / self.r_so if self.r_so > 0 else math.inf

    @property
    def coupling_ratio(self) -> float:
        """w * delta / alpha, the weak/strong SOC knob of the 1D problem."""
        if self.alpha == 0:
            return math.inf
        return self.w * self.delta / self.alpha

    @property
    def coupling_ratio_tilde(self) -> float:
        """w * delta_tilde / alpha, the axis of the steady-spin tables."""
        if self.alpha == 0:
            return math.inf
        return self.w * self.delta_tilde / self.alpha

    def replace(self, **changes) -> "MeasurementSetup":
        return dataclasses.replace(self, **changes)

    # --- Figure unit systems ---

    @classmethod
    def ring(cls, w_over_rso: float, v_sp: float = 0.0, T: float = 1.0) -> "MeasurementSetup":
        """2D setup with R_so = 1 so that w equals w/R_so.

        The pulse lasts T; alpha is scaled so that alpha_tilde T = 1.
        """
        if T <= 0:
            raise ConfigurationError("ring setup needs T > 0")
        return cls(alpha=math.sqrt(2.0) / T, delta=0.0, theta=0.0, w=w_over_rso, T=T, v_sp=v_sp)

    @classmethod
    def zeeman(cls, theta: float, w: float = 1.0, v_sp: float = 0.0,
               T: float = 1.0) -> "MeasurementSetup":
        """1D setup with alpha = 1 and delta chosen so delta_tilde = 1."""
        s = math.sin(theta)
        delta = 1.0 / s if abs(s) > 1e-12 else 1.0
        return cls(alpha=1.0, delta=delta, theta=theta, w=w, T=T, v_sp=v_sp)


def free_packet(x, t: float, setup: MeasurementSetup) -> np.ndarray:
    """Freely spreading 1D Gaussian of initial width w at time t."""
    x = np.asarray(x, dtype=float)
    w = setup.w
    tau = setup.v_sp * t / w
    denom = 1.0 + 1j * tau
    return (math.pi * w * w) ** -0.25 / np.sqrt(denom) * np.exp(-x * x / (2 * w * w * denom))


# ───── Grids ─────


def _next_pow2(n: float) -> int:
    return max(MIN_POINTS, 1 << max(0, math.ceil(math.log2(max(n, 1.0)))))


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid, x_n = (n - N/2) dx on every axis."""

    extent: tuple[float, ...]
    points: tuple[int, ...]

    def __post_init__(self):
        if len(self.extent) != len(self.points) or len(self.points) not in (1, 2):
            raise ConfigurationError("grid must be 1D or 2D with one extent per axis")
        for n, L in zip(self.points, self.extent):
            if n < 2 or n & (n - 1):
                raise ConfigurationError(f"grid points must be a power of two, got {n}")
            if not (math.isfinite(L) and L > 0):
                raise ConfigurationError("grid extent must be positive")

    @property
    def dimension(self) -> int:
        return len(self.points)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.extent, self.points))

    @property
    def cell(self) -> float:
        return math.prod(self.spacing)

    @property
    def k_max(self) -> float:
        return math.pi / max(self.spacing)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.points)

    def axes(self) -> list[np.ndarray]:
        return [(np.arange(n) - n // 2) * d for n, d in zip(self.points, self.spacing)]

    def k_axes(self) -> list[np.ndarray]:
        return [2 * np.pi * np.fft.fftfreq(n, d) for n, d in zip(self.points, self.spacing)]

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*self.axes(), indexing="ij")

    def k_mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*self.k_axes(), indexing="ij")

    def required_extent(self, setup: MeasurementSetup, reach: float, t: float) -> float:
        w_t = math.hypot(setup.w, setup.v_sp * t)
        return 2.0 * (reach + PADDING_WIDTHS * w_t)

    def validate_for(self, setup: MeasurementSetup, reach: float = 0.0,
                     t: float = 0.0) -> None:
        """Raise ConfigurationError if the grid cannot hold the evolved packet."""
        need = self.required_extent(setup, reach, t)
        if min(self.extent) < need:
            raise ConfigurationError(
                f"grid extent {min(self.extent):.6g} smaller than required {need:.6g}"
            )
        if self.k_max < CUTOFF_FACTOR / setup.w:
            raise ConfigurationError(
                f"grid momentum cutoff {self.k_max:.6g} below {CUTOFF_FACTOR}/w"
            )

    @classmethod
    def for_setup(cls, setup: MeasurementSetup, dimension: int, reach: float = 0.0,
                  t: float | None = None, cutoff: float = CUTOFF_FACTOR,
                  points: int | None = None, extent: float | None = None) -> "Grid":
        """Smallest power-of-two grid meeting the sizing rule.

        ``points``/``extent`` override the automatic choice; the result is
        validated either way.
        """
        t = setup.T if t is None else t
        w_t = math.hypot(setup.w, setup.v_sp * t)
        need = 2.0 * (reach + PADDING_WIDTHS * w_t)
        L = float(extent) if extent is not None else need
        if points is None:
            dx = math.pi * setup.w / cutoff
            points = _next_pow2(L / dx)
            if points > MAX_POINTS:
                raise ConfigurationError(
                    f"grid would need {points} points per axis (limit {MAX_POINTS})"
                )
        grid = cls((L,) * dimension, (int(points),) * dimension)
        grid.validate_for(setup, reach, t)
        log.debug(f"grid {dimension}D: {points} points over {L:.6g}")
        return grid

    # --- Transforms ---

    def to_momentum(self, values: np.ndarray) -> np.ndarray:
        """Continuum Fourier transform of each component, fft ordering."""
        axes = tuple(range(1, self.dimension + 1))
        out = np.fft.fftn(values, axes=axes) * self.cell
        for ax, (k, n, d) in enumerate(zip(self.k_axes(), self.points, self.spacing)):
            shape = [1] * (self.dimension + 1)
            shape[ax + 1] = n
            out = out * np.exp(1j * k * (n // 2) * d).reshape(shape)
        return out


# ───── Fields and density matrices ─────


@dataclass(frozen=True)
class SpinorField:
    """Two-component wavefunction on a grid; ``values`` has shape (2, *grid.shape)."""

    grid: Grid
    values: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (2, *self.grid.shape):
            raise InvalidStateError(
                f"field shape {vals.shape} does not match grid {self.grid.shape}"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def density(self) -> np.ndarray:
        return np.abs(self.values[0]) ** 2 + np.abs(self.values[1]) ** 2

    def spin_density(self, axis: int) -> np.ndarray:
        """Psi^dagger sigma_i Psi for axis 0, 1, 2 = x, y, z."""
        a, b = self.values
        if axis == 0:
            return 2 * (np.conj(a) * b).real
        if axis == 1:
            return 2 * (np.conj(a) * b).imag
        if axis == 2:
            return np.abs(a) ** 2 - np.abs(b) ** 2
        raise ValueError(f"spin axis must be 0, 1 or 2, got {axis}")

    def norm(self) -> float:
        return float(np.sum(self.density()) * self.grid.cell)

    def with_values(self, values: np.ndarray, t: float) -> "SpinorField":
        return SpinorField(self.grid, values, t)


@dataclass(frozen=True)
class DensityMatrix2:
    """Reduced 2x2 spin density matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise InvalidStateError("density matrix must be 2x2")
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOLERANCE:
            raise InvalidStateError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > TRACE_TOLERANCE:
            raise InvalidStateError(f"density matrix trace {np.trace(m).real!r} != 1")
        if np.min(np.linalg.eigvalsh(m)) < -HERMITIAN_TOLERANCE:
            raise InvalidStateError("density matrix has a negative eigenvalue")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_field(cls, field: SpinorField) -> "DensityMatrix2":
        a, b = field.values
        cell = field.grid.cell
        n1 = float(np.sum(np.abs(a) ** 2)) * cell
        n2 = float(np.sum(np.abs(b) ** 2)) * cell
        c = complex(np.sum(a * np.conj(b))) * cell
        total = n1 + n2
        return cls(np.array([[n1, c], [c.conjugate(), n2]]) / total)

    @property
    def purity(self) -> float:
        m = self.matrix
        return float((abs(m[0, 0]) ** 2 + abs(m[1, 1]) ** 2 + 2 * abs(m[0, 1]) ** 2))

    def bloch(self) -> np.ndarray:
        m = self.matrix
        return np.array([2 * m[0, 1].real, -2 * m[0, 1].imag, (m[0, 0] - m[1, 1]).real])


@dataclass(frozen=True)
class ObservableSet:
    t: float
    mean_x: float
    width_w_t: float
    sigma_x: float
    sigma_y: float
    sigma_z: float
    sigma_parallel: float
    sigma_perp: float
    purity: float


# --- Public API ---


def make_gaussian_state(setup: MeasurementSetup, spin: SpinState, grid: Grid) -> SpinorField:
    """Normalised Gaussian envelope of width w times the spinor."""
    if min(grid.extent) < 8 * setup.w:
        raise ConfigurationError(
            f"grid extent {min(grid.extent):.6g} too small for w={setup.w:.6g}"
        )
    if grid.k_max < CUTOFF_FACTOR / setup.w:
        raise ConfigurationError(f"grid momentum cutoff too small for w={setup.w:.6g}")

    w = setup.w
    if grid.dimension == 1:
        (x,) = grid.axes()
        envelope = math.pi ** -0.25 / math.sqrt(w) * np.exp(-x * x / (2 * w * w))
    else:
        x, y = grid.mesh()
        envelope = math.sqrt(2.0 / math.pi) / w * np.exp(-(x * x + y * y) / (w * w))
    xi = spin.spinor
    values = xi[:, None] * envelope.ravel()[None, :]
    return SpinorField(grid, values.reshape(2, *grid.shape), 0.0)


def observables_of(field: SpinorField, setup: MeasurementSetup) -> ObservableSet:
    """Coordinate, width and spin observables; x is axis 0 in 2D."""
    norm = field.norm()
    if abs(norm - 1.0) > NORM_TOLERANCE:
        raise InvalidStateError(f"field norm {norm:.12g} deviates from 1")

    rho = field.density()
    x = field.grid.mesh()[0]
    cell = field.grid.cell
    mean_x = float(np.sum(x * rho) * cell) / norm
    mean_x2 = float(np.sum(x * x * rho) * cell) / norm
    width = math.sqrt(2.0 * max(mean_x2 - mean_x * mean_x, 0.0))

    dm = DensityMatrix2.from_field(field)
    sx, sy, sz = (float(v) for v in dm.bloch())
    c, s = math.cos(setup.theta), math.sin(setup.theta)
    return ObservableSet(
        t=field.t,
        mean_x=mean_x,
        width_w_t=width,
        sigma_x=sx,
        sigma_y=sy,
        sigma_z=sz,
        sigma_parallel=sz * c + sx * s,
        sigma_perp=sz * s - sx * c,
        purity=dm.purity,
    )
