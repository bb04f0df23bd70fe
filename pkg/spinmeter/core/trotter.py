"""Lie-Trotter product formulas and exhaustive checkerboard path sums.

Each Trotter step moves the sigma eigencomponents by +-alpha*eps, so an
L-step product is a sum over discrete spin paths on a lattice. This module
is the brute-force oracle for the exact engines in rashba2d and zeeman1d.
"""

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np

from spinmeter.core.qmcore import (
    Grid,
    MeasurementSetup,
    SpinorField,
    SpinState,
    make_gaussian_state,
)
from spinmeter.core.rashba2d import evolve_packet_2d
from spinmeter.core.zeeman1d import evolve_packet_1d
from spinmeter.errors import (
    ConfigurationError,
    DomainError,
    InvalidStateError,
    ResourceError,
)

log = logging.getLogger("spinmeter.core.trotter")

MAX_ENUMERATION_STEPS = 14
STEP_ORDERS = ("xy", "yx")

_ENCODE = {(1, 1): 2, (1, -1): 1, (-1, 1): -1, (-1, -1): -2}
_DECODE = {v: k for k, v in _ENCODE.items()}


# ───── Paths ─────


@dataclass(frozen=True)
class PathRecord:
    """Spin values per Trotter step.

    2D paths carry m_x and m_y; 1D paths carry the sigma_z values in
    ``steps_x`` and leave ``steps_y`` empty.
    """

    steps_x: tuple[int, ...]
    steps_y: tuple[int, ...] = ()
    epsilon: float = 1.0

    def __post_init__(self):
        if not self.steps_x:
            raise ConfigurationError("a path needs at least one step")
        if self.steps_y and len(self.steps_y) != len(self.steps_x):
            raise ConfigurationError("steps_x and steps_y differ in length")
        if any(m not in (-1, 1) for m in self.steps_x + self.steps_y):
            raise DomainError("path steps must be +1 or -1")

    @property
    def L(self) -> int:
        return len(self.steps_x)

    @property
    def is_1d(self) -> bool:
        return not self.steps_y

    def delta_n(self) -> tuple[int, ...]:
        if self.is_1d:
            return (sum(self.steps_x),)
        return (sum(self.steps_x), sum(self.steps_y))

    def encoded(self) -> tuple[int, ...]:
        if self.is_1d:
            raise DomainError("1D paths have no (m_x, m_y) encoding")
        return tuple(encode_M(mx, my) for mx, my in zip(self.steps_x, self.steps_y))


@dataclass(frozen=True)
class PathAmplitude:
    path: PathRecord
    amplitude: complex
    displacement: float
    operator: np.ndarray


@dataclass(frozen=True)
class TrotterErrorRow:
    L: int
    error: float
    ratio: float | None = None


def encode_M(m_x: int, m_y: int) -> int:
    try:
        return _ENCODE[(m_x, m_y)]
    except KeyError:
        raise DomainError(f"spin values must be +1 or -1, got ({m_x!r}, {m_y!r})") from None


def decode_M(value: int) -> tuple[int, int]:
    try:
        return _DECODE[value]
    except KeyError:
        raise DomainError(f"encoded value must be one of -2, -1, 1, 2, got {value!r}") from None


def path_time_average(path: PathRecord):
    """Delta n / L: <sigma_z>_T for 1D paths, (<sigma_x>_T, <sigma_y>_T) for 2D."""
    if path.is_1d:
        return path.delta_n()[0] / path.L
    nx, ny = path.delta_n()
    return (nx / path.L, ny / path.L)


# ───── 2D product formula ─────


def _step_matrices_2d(kx, ky, eps: float, setup: MeasurementSetup, order: str) -> np.ndarray:
    a = setup.alpha_tilde * eps * kx
    b = setup.alpha_tilde * eps * ky
    shear_x = np.empty(kx.shape + (2, 2), dtype=complex)
    shear_x[..., 0, 0] = shear_x[..., 1, 1] = np.cos(a)
    shear_x[..., 0, 1] = -np.sin(a)
    shear_x[..., 1, 0] = np.sin(a)
    shear_y = np.empty(ky.shape + (2, 2), dtype=complex)
    shear_y[..., 0, 0] = shear_y[..., 1, 1] = np.cos(b)
    shear_y[..., 0, 1] = shear_y[..., 1, 0] = 1j * np.sin(b)
    if order == "xy":
        return shear_x @ shear_y
    return shear_y @ shear_x


def trotter_step_product_2d(L: int, setup: MeasurementSetup, grid: Grid,
                            field: SpinorField, order: str = "xy") -> SpinorField:
    """[exp(-a eps d_x sigma_y) exp(+a eps d_y sigma_x)]^L applied to a field."""
    if setup.v_sp != 0:
        raise ConfigurationError("product formula needs v_sp = 0")
    if order not in STEP_ORDERS:
        raise ConfigurationError(f"order must be one of {STEP_ORDERS}, got {order!r}")
    if L < 1:
        raise ConfigurationError("L must be at least 1")
    if field.grid != grid or grid.dimension != 2:
        raise ConfigurationError("field must live on the given 2D grid")
    if setup.r_so >= min(grid.extent) / 2:
        raise ConfigurationError(
            f"shift R_so={setup.r_so:.6g} exceeds the grid half-extent"
        )
    norm = field.norm()
    if abs(norm - 1) > 1e-6:
        raise InvalidStateError(f"field norm {norm:.12g} deviates from 1")

    kx, ky = grid.k_mesh()
    step = _step_matrices_2d(kx, ky, setup.T / L, setup, order)
    U = np.linalg.matrix_power(step, L)
    psi = np.fft.fft2(field.values, axes=(1, 2))
    out = np.einsum("xyij,jxy->ixy", U, psi)
    return SpinorField(grid, np.fft.ifft2(out, axes=(1, 2)), field.t + setup.T)


# ───── 1D path sums ─────


def _zeeman_step(eps: float, setup: MeasurementSetup) -> np.ndarray:
    b = setup.field_direction
    c, s = math.cos(eps * setup.delta / 2), math.sin(eps * setup.delta / 2)
    return np.array([[c - 1j * s * b[2], -1j * s * b[0]],
                     [-1j * s * b[0], c + 1j * s * b[2]]])


def split_mode_propagator_1d(L: int, k, t: float, setup: MeasurementSetup) -> np.ndarray:
    """[exp(-i eps alpha k sigma_z) exp(-i eps delta (b.sigma)/2)]^L per mode."""
    if L < 1:
        raise ConfigurationError("L must be at least 1")
    k = np.asarray(k, dtype=float)
    eps = t / L
    Z = _zeeman_step(eps, setup)
    D = np.zeros(k.shape + (2, 2), dtype=complex)
    D[..., 0, 0] = np.exp(-1j * eps * setup.alpha * k)
    D[..., 1, 1] = np.exp(1j * eps * setup.alpha * k)
    return np.linalg.matrix_power(D @ Z, L)


def enumerate_paths_1d(L: int, setup: MeasurementSetup,
                       t: float | None = None) -> list[PathAmplitude]:
    """Every sigma_z path of L steps with its Zeeman amplitude and displacement."""
    if L < 1:
        raise ConfigurationError("L must be at least 1")
    if L > MAX_ENUMERATION_STEPS:
        raise ResourceError(
            f"exhaustive enumeration limited to L <= {MAX_ENUMERATION_STEPS} (2^L paths)"
        )
    t = setup.T if t is None else t
    eps = t / L
    Z = _zeeman_step(eps, setup)
    index = {1: 0, -1: 1}

    paths = []
    for spins in itertools.product((1, -1), repeat=L):
        c = complex(1.0)
        for prev, nxt in zip(spins, spins[1:]):
            c *= Z[index[nxt], index[prev]]
        ket = np.zeros(2)
        ket[index[spins[-1]]] = 1.0
        operator = c * np.outer(ket, Z[index[spins[0]]])
        paths.append(PathAmplitude(
            path=PathRecord(tuple(spins), (), eps),
            amplitude=c,
            displacement=setup.alpha * eps * sum(spins),
            operator=operator,
        ))
    log.debug(f"enumerated {len(paths)} paths for L={L}")
    return paths


def displacement_sectors(paths: list[PathAmplitude]) -> dict[int, tuple[float, np.ndarray]]:
    """Delta n -> (displacement, summed path operator M_d)."""
    sectors: dict[int, tuple[float, np.ndarray]] = {}
    for p in paths:
        dn = p.path.delta_n()[0]
        if dn in sectors:
            d, m = sectors[dn]
            sectors[dn] = (d, m + p.operator)
        else:
            sectors[dn] = (p.displacement, p.operator.astype(complex))
    return dict(sorted(sectors.items()))


def path_sum_propagator(paths: list[PathAmplitude], k) -> np.ndarray:
    """sum_d e^{-ikd} M_d for scalar or array k."""
    k = np.asarray(k, dtype=float)
    out = np.zeros(k.shape + (2, 2), dtype=complex)
    for d, m in displacement_sectors(paths).values():
        out += np.exp(-1j * k * d)[..., None, None] * m
    return out


def displacement_distribution(L: int, setup: MeasurementSetup,
                              spin: SpinState) -> dict[float, float]:
    """Pointer distribution {displacement: ||M_d xi||^2} for a point-like pointer."""
    xi = spin.spinor
    return {
        d: float(np.sum(np.abs(m @ xi) ** 2))
        for d, m in displacement_sectors(enumerate_paths_1d(L, setup)).values()
    }


def trotter_convergence_1d(L_values, setup: MeasurementSetup, spin: SpinState,
                           grid: Grid, t: float) -> list[TrotterErrorRow]:
    """L2 distance between the L-step split evolution and the exact field."""
    if setup.v_sp != 0:
        raise ConfigurationError("product formula needs v_sp = 0")
    exact = evolve_packet_1d(spin, setup, grid, t)
    psi_k = np.fft.fft(make_gaussian_state(setup, spin, grid).values, axis=-1)
    (k,) = grid.k_axes()
    dx = grid.cell

    rows: list[TrotterErrorRow] = []
    for L in L_values:
        U = split_mode_propagator_1d(int(L), k, t, setup)
        split = np.fft.ifft(np.einsum("kij,jk->ik", U, psi_k), axis=-1)
        error = math.sqrt(float(np.sum(np.abs(split - exact.values) ** 2)) * dx)
        ratio = rows[-1].error / error if rows and error > 0 else None
        rows.append(TrotterErrorRow(int(L), error, ratio))
        log.debug(f"trotter L={L}: error {error:.3e}")
    return rows


def trotter_convergence_2d(L_values, setup: MeasurementSetup, spin: SpinState,
                           grid: Grid, order: str = "xy") -> list[TrotterErrorRow]:
    exact = evolve_packet_2d(spin, setup, grid)
    field0 = make_gaussian_state(setup, spin, grid)
    rows: list[TrotterErrorRow] = []
    for L in L_values:
        approx = trotter_step_product_2d(int(L), setup, grid, field0, order)
        error = math.sqrt(float(np.sum(np.abs(approx.values - exact.values) ** 2)) * grid.cell)
        ratio = rows[-1].error / error if rows and error > 0 else None
        rows.append(TrotterErrorRow(int(L), error, ratio))
    return rows
