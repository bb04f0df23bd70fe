"""Tests for config loading and validation."""

import math
import os
import tempfile
import unittest

import pytest

from spinmeter.config import (
    DEFAULTS,
    SCENARIOS,
    load_config,
    parse_config,
)
from spinmeter.core.rashba2d import accuracy_report
from spinmeter.errors import AsymptoticRegimeError, ConfigError


def _write_config(tmpdir, content):
    path = os.path.join(tmpdir, "config.yaml")
    with open(path, "w") as f:
        f.write(content)
    return path


class TestValidConfig(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.mkdtemp(prefix="spinmeter-cfgtest-")

    def test_minimal_config(self):
        path = _write_config(self.tmpdir, "scenario: density_1d\n")
        cfg = load_config(path)
        self.assertEqual(cfg.scenario, "density_1d")
        self.assertAlmostEqual(cfg.theta, math.pi / 4)
        self.assertEqual(cfg.widths, (0.5, 1.0, 2.0))
        self.assertEqual(cfg.formats, ("csv", "json"))
        self.assertFalse(cfg.strict)

    def test_delta_defaults_to_unit_delta_tilde(self):
        path = _write_config(self.tmpdir, "scenario: trajectory_1d\ntheta: pi/3\n")
        cfg = load_config(path)
        self.assertAlmostEqual(cfg.setup_1d().delta_tilde, 1.0)

    def test_all_fields(self):
        content = """
scenario: spiral_1d
theta: 0.5*pi
beta: pi/2
phi: -pi/4
alpha: 2
delta: 3
w: 0.5
v_sp: 0.1
widths: [1, 2]
spread_speeds: [0, 0.5]
T: 2
t: 4
times: {start: 0, stop: 10, step: 0.5}
tail_window: [5, 10]
w_over_rso: 0.02
trotter_steps: [8, 16]
grid_points: 512
grid_extent: 80
output_dir: out
formats: [csv, svg]
strict: true
log_level: debug
"""
        path = _write_config(self.tmpdir, content)
        cfg = load_config(path)
        self.assertAlmostEqual(cfg.theta, math.pi / 2)
        self.assertAlmostEqual(cfg.beta, math.pi / 2)
        self.assertAlmostEqual(cfg.phi, -math.pi / 4)
        self.assertEqual(cfg.delta, 3.0)
        self.assertEqual(cfg.times, (0.0, 10.0, 0.5))
        self.assertEqual(cfg.tail_window, (5.0, 10.0))
        self.assertEqual(cfg.trotter_steps, (8, 16))
        self.assertEqual(cfg.grid_points, 512)
        self.assertEqual(cfg.formats, ("csv", "svg"))
        self.assertTrue(cfg.strict)
        self.assertEqual(cfg.output_dir, os.path.join(os.path.realpath(self.tmpdir), "out"))

    def test_log_level_normalized(self):
        path = _write_config(self.tmpdir, "scenario: asymptotics\nlog_level: WARNING\n")
        cfg = load_config(path)
        self.assertEqual(cfg.log_level, "warning")

    def test_scenario_profile_fills_unset_keys(self):
        path = _write_config(self.tmpdir, "scenario: spiral_1d\n")
        cfg = load_config(path)
        self.assertEqual(cfg.times, (0.0, 200.0, 0.1))

    def test_user_value_beats_profile(self):
        content = "scenario: spiral_1d\ntimes: {start: 0, stop: 20, step: 1}\n"
        cfg = load_config(_write_config(self.tmpdir, content))
        self.assertEqual(cfg.times, (0.0, 20.0, 1.0))
        self.assertEqual(len(cfg.time_grid()), 21)

    def test_echo_is_plain(self):
        cfg = load_config(_write_config(self.tmpdir, "scenario: moments_2d\n"))
        echo = cfg.echo()
        self.assertEqual(set(echo), set(DEFAULTS))
        self.assertIsInstance(echo["widths"], list)

    def test_every_scenario_loads(self):
        for name in SCENARIOS:
            cfg = load_config(_write_config(self.tmpdir, f"scenario: {name}\n"))
            self.assertEqual(cfg.scenario, name)


class TestInvalidConfig(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.mkdtemp(prefix="spinmeter-cfgtest-")

    def _assert_exit(self, content):
        path = _write_config(self.tmpdir, content)
        with self.assertRaises(SystemExit) as cm:
            load_config(path)
        self.assertEqual(cm.exception.code, 2)

    def test_missing_file(self):
        with self.assertRaises(SystemExit):
            load_config(os.path.join(self.tmpdir, "nonexistent.yaml"))

    def test_empty_file(self):
        self._assert_exit("")

    def test_missing_scenario(self):
        self._assert_exit("w: 1\n")

    def test_unknown_scenario(self):
        self._assert_exit("scenario: figure_9\n")

    def test_zero_width(self):
        self._assert_exit("scenario: density_1d\nw: 0\n")

    def test_wrong_type(self):
        self._assert_exit('scenario: density_1d\nalpha: "fast"\n')

    def test_theta_out_of_range(self):
        self._assert_exit("scenario: density_1d\ntheta: 4\n")

    def test_bad_angle_text(self):
        self._assert_exit("scenario: density_1d\ntheta: tau/4\n")

    def test_grid_points_not_power_of_two(self):
        self._assert_exit("scenario: density_1d\ngrid_points: 100\n")

    def test_times_missing_step(self):
        self._assert_exit("scenario: trajectory_1d\ntimes: {start: 0, stop: 1}\n")

    def test_unknown_format(self):
        self._assert_exit("scenario: density_1d\nformats: [pdf]\n")

    def test_invalid_yaml(self):
        self._assert_exit(":\n  :\n    [invalid yaml]]]")

    def test_non_mapping_yaml(self):
        self._assert_exit("- a list\n- not a mapping\n")

    def test_ring_outside_regime(self):
        self._assert_exit("scenario: ring_profile\nw_over_rso: 0.5\n")

    def test_angle_without_digits(self):
        self._assert_exit("scenario: density_1d\ntheta: '.pi/4'\n")
        self._assert_exit("scenario: density_1d\nbeta: '-.pi'\n")

    def test_angle_divided_by_zero(self):
        self._assert_exit("scenario: density_1d\nphi: pi/0\n")

    def test_zero_pulse_duration(self):
        self._assert_exit("scenario: moments_2d\nT: 0\n")

    def test_ring_profile_needs_infinite_mass(self):
        self._assert_exit("scenario: ring_profile\nv_sp: 0.1\n")


# --- parse_config error details ---


def test_unknown_key_reports_line():
    try:
        parse_config("scenario: density_1d\nw: 1\nwidht: 2\n")
    except ConfigError as e:
        assert e.key == "widht"
        assert e.line == 3
        assert "line 3" in str(e)
    else:
        raise AssertionError("unknown key accepted")


def test_invalid_value_reports_key_and_message():
    try:
        parse_config("scenario: density_1d\nw: 0\n")
    except ConfigError as e:
        assert e.message == "w must be positive"
        assert e.key == "w"
        assert e.line == 2
    else:
        raise AssertionError("w = 0 accepted")


def test_angle_without_digits_reports_key():
    try:
        parse_config("scenario: asymptotics\ntheta: '.pi/4'\n")
    except ConfigError as e:
        assert e.key == "theta"
        assert e.line == 2
    else:
        raise AssertionError("angle without digits accepted")


def test_angle_forms():
    cfg = parse_config("scenario: asymptotics\ntheta: '.5pi'\nbeta: -pi/2\nphi: 2pi/8\n")
    assert cfg.theta == pytest.approx(math.pi / 2)
    assert cfg.beta == pytest.approx(-math.pi / 2)
    assert cfg.phi == pytest.approx(math.pi / 4)


def test_pulse_duration_and_spread_reach_2d_setup():
    cfg = parse_config("scenario: moments_2d\nT: 4\nv_sp: 0.05\nw_over_rso: 0.02\n")
    setup = cfg.setup_2d()
    assert setup.T == 4.0
    assert setup.v_sp == 0.05
    assert setup.r_so == pytest.approx(1.0)
    assert setup.w_over_rso == pytest.approx(0.02)
    report = accuracy_report(setup)
    assert report.speed_ratio == pytest.approx(math.sqrt(2) / 4 / 0.05)
    assert accuracy_report(parse_config("scenario: moments_2d\nv_sp: 0.05\n").setup_2d()).speed_ratio \
        > report.speed_ratio


def test_pulse_duration_ignored_by_1d_scenarios_is_logged(caplog):
    with caplog.at_level("WARNING", logger="spinmeter.config"):
        parse_config("scenario: asymptotics\nT: 37\n")
    assert "ignored by 'asymptotics'" in caplog.text


def test_ring_regime_error_type():
    try:
        parse_config("scenario: ring_profile\nw_over_rso: 0.2\n")
    except AsymptoticRegimeError as e:
        assert "0.1" in str(e)
    else:
        raise AssertionError("ring profile accepted outside its regime")


def test_ring_regime_only_checked_for_ring():
    cfg = parse_config("scenario: moments_2d\nw_over_rso: 0.2\n")
    assert cfg.w_over_rso == 0.2


def test_relative_output_dir_kept_without_base():
    cfg = parse_config("scenario: asymptotics\noutput_dir: out\n")
    assert cfg.output_dir == "out"


def test_single_format_string():
    cfg = parse_config("scenario: asymptotics\nformats: json\n")
    assert cfg.formats == ("json",)


if __name__ == "__main__":
    unittest.main()
