"""Tests for qmcore.py: spin states, setups, grids, fields, observables."""

import math
import unittest

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinmeter.core.qmcore import (
    DensityMatrix2,
    Grid,
    MeasurementSetup,
    SpinorField,
    SpinState,
    free_packet,
    make_gaussian_state,
    observables_of,
    rotate_spin,
)
from spinmeter.errors import ConfigurationError, InvalidStateError

angles = st.floats(min_value=-10, max_value=10, allow_nan=False)


# --- SpinState ---


def test_spin_up():
    s = SpinState(0.0)
    assert np.allclose(s.spinor, [1, 0])
    assert np.allclose(s.bloch(), [0, 0, 1])


def test_spin_along_x():
    assert np.allclose(SpinState(math.pi / 2, 0.0).bloch(), [1, 0, 0])


def test_spin_phase_convention():
    # (sin b cos p, -sin b sin p, cos b)
    assert np.allclose(SpinState(math.pi / 2, math.pi / 2).bloch(), [0, -1, 0])


@given(beta=angles, phi=angles)
def test_bloch_vector_is_unit(beta, phi):
    b = SpinState(beta, phi).bloch()
    assert abs(np.linalg.norm(b) - 1) < 1e-12


@given(beta=angles, phi=angles)
def test_bloch_matches_angles(beta, phi):
    b = SpinState(beta, phi).bloch()
    expected = [math.sin(beta) * math.cos(phi), -math.sin(beta) * math.sin(phi), math.cos(beta)]
    assert np.allclose(b, expected, atol=1e-12)


def test_rotate_spin_shifts_phase():
    s = rotate_spin(SpinState(1.0, 0.2), 0.5)
    assert s.beta == 1.0
    assert s.phi == pytest.approx(0.7)


def test_spin_rejects_nan():
    with pytest.raises(ConfigurationError):
        SpinState(float("nan"))


# --- MeasurementSetup ---


class TestMeasurementSetup(unittest.TestCase):
    def test_derived_quantities(self):
        s = MeasurementSetup(alpha=2.0, delta=3.0, theta=math.pi / 6, w=0.5, T=4.0)
        self.assertAlmostEqual(s.alpha_tilde, 2 / math.sqrt(2))
        self.assertAlmostEqual(s.r_so, 4 * math.sqrt(2))
        self.assertAlmostEqual(s.delta_tilde, 1.5)
        self.assertAlmostEqual(s.gamma, 3 * math.cos(math.pi / 6) / 2)
        self.assertAlmostEqual(s.coupling_ratio, 0.75)
        self.assertAlmostEqual(s.coupling_ratio_tilde, 0.375)

    def test_inverse_mass(self):
        s = MeasurementSetup(w=2.0, v_sp=0.25)
        self.assertAlmostEqual(s.inverse_mass, 0.5)

    def test_zero_alpha_gamma(self):
        self.assertEqual(MeasurementSetup(alpha=0.0, delta=1.0).gamma, math.inf)

    def test_ring_units(self):
        s = MeasurementSetup.ring(0.01)
        self.assertAlmostEqual(s.r_so, 1.0)
        self.assertAlmostEqual(s.w_over_rso, 0.01)

    def test_ring_pulse_duration(self):
        s = MeasurementSetup.ring(0.02, v_sp=0.1, T=4.0)
        self.assertAlmostEqual(s.r_so, 1.0)
        self.assertAlmostEqual(s.alpha, math.sqrt(2) / 4)
        self.assertEqual(s.v_sp, 0.1)
        with self.assertRaises(ConfigurationError):
            MeasurementSetup.ring(0.02, T=0.0)

    def test_zeeman_units(self):
        s = MeasurementSetup.zeeman(math.pi / 4)
        self.assertAlmostEqual(s.delta_tilde, 1.0)
        self.assertEqual(s.alpha, 1.0)

    def test_width_must_be_positive(self):
        with self.assertRaises(ConfigurationError) as cm:
            MeasurementSetup(w=0.0)
        self.assertIn("w must be positive", str(cm.exception))

    def test_invalid_ranges(self):
        for kw in ({"T": -1}, {"v_sp": -0.1}, {"alpha": -1}, {"delta": -1},
                   {"theta": 4.0}, {"alpha": float("inf")}):
            with self.assertRaises(ConfigurationError):
                MeasurementSetup(**kw)

    def test_replace(self):
        s = MeasurementSetup(w=1.0).replace(w=2.0)
        self.assertEqual(s.w, 2.0)


def test_free_packet_at_zero_time():
    setup = MeasurementSetup(w=1.5, v_sp=0.3)
    x = np.linspace(-5, 5, 11)
    expected = math.pi ** -0.25 / math.sqrt(1.5) * np.exp(-x * x / (2 * 1.5 ** 2))
    assert np.allclose(free_packet(x, 0.0, setup), expected)


def test_free_packet_keeps_norm():
    setup = MeasurementSetup(w=1.0, v_sp=0.8)
    x = np.linspace(-60, 60, 24001)
    rho = np.abs(free_packet(x, 10.0, setup)) ** 2
    assert np.sum(rho) * (x[1] - x[0]) == pytest.approx(1.0, abs=1e-9)


# --- Grid ---


def test_grid_rejects_non_power_of_two():
    with pytest.raises(ConfigurationError):
        Grid((10.0,), (100,))


def test_grid_axis_centred():
    g = Grid((16.0,), (64,))
    (x,) = g.axes()
    assert x[32] == 0.0
    assert x[0] == pytest.approx(-8.0)
    assert g.k_max == pytest.approx(4 * math.pi)


def test_for_setup_sizing():
    g = Grid.for_setup(MeasurementSetup(w=1.0), 1, reach=0.0, t=0.0)
    assert g.extent == (16.0,)
    assert g.points == (64,)


def test_for_setup_accounts_for_reach_and_spreading():
    setup = MeasurementSetup(w=1.0, v_sp=0.5)
    g = Grid.for_setup(setup, 1, reach=10.0, t=20.0)
    assert g.extent[0] >= 2 * (10 + 8 * math.hypot(1.0, 10.0))


def test_validate_for_small_grid():
    with pytest.raises(ConfigurationError):
        Grid((20.0,), (64,)).validate_for(MeasurementSetup(w=1.0), reach=5.0)


def test_for_setup_override_validated():
    with pytest.raises(ConfigurationError):
        Grid.for_setup(MeasurementSetup(w=1.0), 1, points=16, extent=16.0)


def test_to_momentum_of_gaussian():
    setup = MeasurementSetup(w=1.0)
    g = Grid.for_setup(setup, 1, t=0.0)
    field = make_gaussian_state(setup, SpinState(0.0), g)
    (k,) = g.k_axes()
    expected = math.sqrt(2 * math.sqrt(math.pi)) * np.exp(-k * k / 2)
    assert np.allclose(g.to_momentum(field.values)[0], expected, atol=1e-10)


# --- Fields ---


def test_gaussian_state_norm_1d():
    setup = MeasurementSetup(w=0.7)
    g = Grid.for_setup(setup, 1, t=0.0)
    assert make_gaussian_state(setup, SpinState(1.0, 2.0), g).norm() == pytest.approx(1, abs=1e-12)


def test_gaussian_state_norm_2d():
    setup = MeasurementSetup.ring(0.25)
    g = Grid.for_setup(setup, 2, t=0.0)
    assert make_gaussian_state(setup, SpinState(0.3), g).norm() == pytest.approx(1, abs=1e-12)


def test_gaussian_state_rejects_narrow_grid():
    with pytest.raises(ConfigurationError):
        make_gaussian_state(MeasurementSetup(w=1.0), SpinState(0.0), Grid((4.0,), (64,)))


def test_gaussian_state_rejects_coarse_grid():
    with pytest.raises(ConfigurationError):
        make_gaussian_state(MeasurementSetup(w=1.0), SpinState(0.0), Grid((64.0,), (64,)))


def test_field_shape_checked():
    with pytest.raises(InvalidStateError):
        SpinorField(Grid((16.0,), (64,)), np.zeros((2, 32)))


def test_field_values_read_only():
    setup = MeasurementSetup(w=1.0)
    field = make_gaussian_state(setup, SpinState(0.0), Grid.for_setup(setup, 1, t=0.0))
    assert not field.values.flags.writeable


def test_spin_density_axes():
    setup = MeasurementSetup(w=1.0)
    g = Grid.for_setup(setup, 1, t=0.0)
    field = make_gaussian_state(setup, SpinState(math.pi / 2, 0.0), g)
    rho = field.density()
    assert np.allclose(field.spin_density(0), rho)
    assert np.allclose(field.spin_density(1), 0)
    assert np.allclose(field.spin_density(2), 0, atol=1e-15)
    with pytest.raises(ValueError):
        field.spin_density(3)


# --- Density matrices ---


class TestDensityMatrix(unittest.TestCase):
    def test_pure_state(self):
        xi = SpinState(1.1, 0.4).spinor
        dm = DensityMatrix2(np.outer(xi, xi.conj()))
        self.assertAlmostEqual(dm.purity, 1.0)
        self.assertTrue(np.allclose(dm.bloch(), SpinState(1.1, 0.4).bloch()))

    def test_mixed_state(self):
        dm = DensityMatrix2(np.eye(2) / 2)
        self.assertAlmostEqual(dm.purity, 0.5)
        self.assertTrue(np.allclose(dm.bloch(), 0))

    def test_not_hermitian(self):
        with self.assertRaises(InvalidStateError):
            DensityMatrix2(np.array([[0.5, 0.1], [0.2, 0.5]]))

    def test_bad_trace(self):
        with self.assertRaises(InvalidStateError):
            DensityMatrix2(np.eye(2))

    def test_negative_eigenvalue(self):
        with self.assertRaises(InvalidStateError):
            DensityMatrix2(np.array([[0.5, 0.9], [0.9, 0.5]]))


@settings(max_examples=25, deadline=None)
@given(beta=angles, phi=angles)
def test_field_bloch_matches_spinor(beta, phi):
    setup = MeasurementSetup(w=1.0)
    g = Grid((16.0,), (64,))
    spin = SpinState(beta, phi)
    dm = DensityMatrix2.from_field(make_gaussian_state(setup, spin, g))
    assert np.allclose(dm.bloch(), spin.bloch(), atol=1e-10)


# --- Observables ---


def test_observables_of_initial_packet():
    setup = MeasurementSetup(w=1.3, theta=math.pi / 3, delta=1.0)
    g = Grid.for_setup(setup, 1, t=0.0)
    obs = observables_of(make_gaussian_state(setup, SpinState(0.0), g), setup)
    assert obs.mean_x == pytest.approx(0.0, abs=1e-12)
    assert obs.width_w_t == pytest.approx(1.3, rel=1e-10)
    assert obs.sigma_z == pytest.approx(1.0)
    assert obs.sigma_parallel == pytest.approx(0.5)
    assert obs.sigma_perp == pytest.approx(math.sin(math.pi / 3))
    assert obs.purity == pytest.approx(1.0)


def test_observables_reject_unnormalised_field():
    setup = MeasurementSetup(w=1.0)
    field = make_gaussian_state(setup, SpinState(0.0), Grid.for_setup(setup, 1, t=0.0))
    with pytest.raises(InvalidStateError):
        observables_of(field.with_values(field.values * 2, 0.0), setup)


def test_gaussian_peak_values():
    setup = MeasurementSetup(w=1.0)
    g = Grid.for_setup(setup, 1, t=0.0)
    field = make_gaussian_state(setup, SpinState(0.0), g)
    assert field.values[0, g.points[0] // 2].real == pytest.approx(math.pi ** -0.25)

    setup2 = MeasurementSetup(w=1.0)
    g2 = Grid.for_setup(setup2, 2, t=0.0)
    field2 = make_gaussian_state(setup2, SpinState(0.0), g2)
    centre = tuple(n // 2 for n in g2.points)
    assert field2.density()[centre] == pytest.approx(2 / math.pi)


def test_perp_component_of_equatorial_spin():
    theta = 0.6
    setup = MeasurementSetup(w=1.0, theta=theta, delta=1.0)
    field = make_gaussian_state(setup, SpinState(math.pi / 2, 0.0), Grid.for_setup(setup, 1, t=0.0))
    assert observables_of(field, setup).sigma_perp == pytest.approx(-math.cos(theta))


@settings(max_examples=25, deadline=None)
@given(beta=angles, phi=angles, weight=st.floats(0.0, 1.0))
def test_bloch_length_matches_purity(beta, phi, weight):
    xi = SpinState(beta, phi).spinor
    m = weight * np.outer(xi, xi.conj()) + (1 - weight) * np.eye(2) / 2
    dm = DensityMatrix2(m)
    assert float(np.sum(dm.bloch() ** 2)) == pytest.approx(2 * dm.purity - 1, abs=1e-8)
    assert 0.5 - 1e-12 <= dm.purity <= 1 + 1e-12
