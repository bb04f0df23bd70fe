"""Config loading and validation for spinmeter.

One YAML file describes one scenario run. Defaults are merged under the
user's values, then the scenario profile fills whatever the user left
unset. ``parse_config`` raises; ``load_config`` prints a readable error and
exits, the one place where crashing is correct.
"""

import dataclasses
import logging
import math
import os
import re
import sys
from dataclasses import dataclass
from pathlib import Path

import yaml

from spinmeter.core.qmcore import MeasurementSetup, SpinState
from spinmeter.core.rashba2d import check_ring_regime
from spinmeter.errors import ConfigError, ConfigurationError

log = logging.getLogger("spinmeter.config")

SCENARIOS = (
    "ring_profile",
    "density_1d",
    "spread_1d",
    "trajectory_1d",
    "spiral_1d",
    "asymptotics",
    "trotter_check",
    "moments_2d",
)

PULSE_SCENARIOS = ("ring_profile", "moments_2d")
SUPPORTED_FORMATS = ("csv", "json", "svg")
LOG_LEVELS = ("debug", "info", "warning", "error")

DEFAULTS: dict = {
    "scenario": None,
    # --- Spin and field ---
    "theta": math.pi / 4,
    "beta": 0.0,
    "phi": 0.0,
    "alpha": 1.0,
    "delta": None,              # None: delta_tilde = delta sin(theta) = 1
    # --- Packet ---
    "w": 1.0,
    "v_sp": 0.0,
    "widths": [0.5, 1.0, 2.0],
    "spread_speeds": [0.0, 0.4, 0.8],
    # --- Time ---
    "T": 1.0,                   # 2D pulse duration; R_so stays 1
    "t": 2 * math.pi,
    "times": {"start": 0.0, "stop": 16 * math.pi, "step": 0.01},
    "tail_window": [150.0, 200.0],
    # --- 2D ---
    "w_over_rso": 0.01,
    # --- Trotter ---
    "trotter_steps": [16, 32, 64, 128],
    # --- Grid overrides ---
    "grid_points": None,
    "grid_extent": None,
    # --- Output ---
    "output_dir": "./results",
    "formats": ["csv", "json"],
    "strict": False,
    # --- Logging ---
    "log_level": "info",
}

# Per-scenario default overrides; keys the user set explicitly win.
SCENARIO_PROFILES: dict[str, dict] = {
    "ring_profile": {},
    "moments_2d": {"w_over_rso": 0.01},
    "density_1d": {"t": 2 * math.pi},
    "spread_1d": {"t": 16 * math.pi, "w": 1.0},
    "trajectory_1d": {"times": {"start": 0.0, "stop": 16 * math.pi, "step": 0.01}},
    "spiral_1d": {"times": {"start": 0.0, "stop": 200.0, "step": 0.1}},
    "asymptotics": {},
    "trotter_check": {"t": math.pi, "trotter_steps": [16, 32, 64, 128]},
}

_ANGLE = re.compile(r"^\s*(?P<num>[-+]?(?:\d+\.?\d*|\.\d+)?)\s*\*?\s*pi\s*(?:/\s*(?P<den>\d+\.?\d*))?\s*$")


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    theta: float
    beta: float
    phi: float
    alpha: float
    delta: float
    w: float
    v_sp: float
    widths: tuple[float, ...]
    spread_speeds: tuple[float, ...]
    T: float
    t: float
    times: tuple[float, float, float]
    tail_window: tuple[float, float]
    w_over_rso: float
    trotter_steps: tuple[int, ...]
    grid_points: int | None
    grid_extent: float | None
    output_dir: str
    formats: tuple[str, ...]
    strict: bool
    log_level: str

    def spin(self) -> SpinState:
        return SpinState(self.beta, self.phi)

    def setup_1d(self, w: float | None = None, v_sp: float | None = None,
                 t: float | None = None) -> MeasurementSetup:
        return MeasurementSetup(
            alpha=self.alpha,
            delta=self.delta,
            theta=self.theta,
            w=self.w if w is None else w,
            T=self.t if t is None else t,
            v_sp=self.v_sp if v_sp is None else v_sp,
        )

    def setup_2d(self) -> MeasurementSetup:
        return MeasurementSetup.ring(self.w_over_rso, v_sp=self.v_sp, T=self.T)

    def time_grid(self) -> list[float]:
        start, stop, step = self.times
        n = int(round((stop - start) / step))
        return [start + i * step for i in range(n + 1)]

    def echo(self) -> dict:
        """Plain-dict view for the run summary."""
        return {k: (list(v) if isinstance(v, tuple) else v)
                for k, v in dataclasses.asdict(self).items()}


# --- Public API ---


def parse_config(text: str, base_dir: str | None = None) -> ScenarioConfig:
    """Parse and validate YAML config text. Raises ConfigError."""
    try:
        root = yaml.compose(text)
        raw = yaml.safe_load(text) or {}
    except yaml.YAMLError as e:
        line = getattr(getattr(e, "problem_mark", None), "line", None)
        raise ConfigError(f"invalid YAML: {e}", line=None if line is None else line + 1)
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping of key: value pairs")

    lines = _key_lines(root)
    for key in raw:
        if key not in DEFAULTS:
            raise ConfigError(f"unknown key '{key}'", key=str(key), line=lines.get(key))

    scenario = raw.get("scenario")
    if scenario is None:
        raise ConfigError("missing required key 'scenario'", key="scenario")
    if scenario not in SCENARIOS:
        raise ConfigError(
            f"unknown scenario {scenario!r}; choose one of {', '.join(SCENARIOS)}",
            key="scenario", line=lines.get("scenario"),
        )

    cfg: dict = {**DEFAULTS, **raw}
    for key, val in SCENARIO_PROFILES[scenario].items():
        if key not in raw:
            cfg[key] = val
    log.debug(f"scenario profile applied for '{scenario}'")
    if "T" in raw and scenario not in PULSE_SCENARIOS:
        log.warning(f"T sets the 2D pulse duration and is ignored by '{scenario}'")

    config = _validate(cfg, lines)
    if base_dir is not None and not os.path.isabs(config.output_dir):
        out = os.path.join(base_dir, os.path.expanduser(config.output_dir))
        config = dataclasses.replace(config, output_dir=out)

    if scenario == "ring_profile":
        if config.v_sp != 0:
            _fail("ring_profile needs v_sp = 0 (infinite mass)", "v_sp", lines)
        check_ring_regime(config.setup_2d())
    return config


def load_config(config_path: str) -> ScenarioConfig:
    """Load, validate, and return the config. Exits on error."""
    path = Path(config_path)
    if not path.exists():
        _die(
            f"Config file not found: {path}\n"
            "  Copy config.example.yaml to that location and edit it."
        )
    text = path.read_text(encoding="utf-8")
    try:
        return parse_config(text, base_dir=str(path.resolve().parent))
    except (ConfigError, ConfigurationError) as e:
        _die(f"{path}: {e}")


# --- Internal ---


def _key_lines(root) -> dict:
    if not isinstance(root, yaml.MappingNode):
        return {}
    return {k.value: k.start_mark.line + 1 for k, _ in root.value}


def _fail(message: str, key: str, lines: dict):
    raise ConfigError(message, key=key, line=lines.get(key))


def _number(cfg: dict, key: str, lines: dict) -> float:
    val = cfg[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        _fail(f"{key} must be a number (got {val!r})", key, lines)
    if not math.isfinite(val):
        _fail(f"{key} must be finite", key, lines)
    return float(val)


def _angle(cfg: dict, key: str, lines: dict) -> float:
    val = cfg[key]
    if isinstance(val, str):
        m = _ANGLE.match(val)
        if not m:
            _fail(f"{key} must be a number or a multiple of pi (got {val!r})", key, lines)
        num = m.group("num")
        factor = float(num) if num not in ("", "+", "-") else (-1.0 if num == "-" else 1.0)
        den = float(m.group("den")) if m.group("den") else 1.0
        if den == 0:
            _fail(f"{key} divides pi by zero", key, lines)
        return factor * math.pi / den
    return _number(cfg, key, lines)


def _number_list(cfg: dict, key: str, lines: dict) -> tuple[float, ...]:
    val = cfg[key]
    if not isinstance(val, list) or not val:
        _fail(f"{key} must be a non-empty list of numbers", key, lines)
    out = []
    for item in val:
        if isinstance(item, bool) or not isinstance(item, (int, float)) or not math.isfinite(item):
            _fail(f"{key} must contain only finite numbers (got {item!r})", key, lines)
        out.append(float(item))
    return tuple(out)


def _validate(cfg: dict, lines: dict) -> ScenarioConfig:
    theta = _angle(cfg, "theta", lines)
    if not 0.0 <= theta <= math.pi:
        _fail("theta must lie in [0, pi]", "theta", lines)
    beta = _angle(cfg, "beta", lines)
    phi = _angle(cfg, "phi", lines)

    alpha = _number(cfg, "alpha", lines)
    if alpha < 0:
        _fail("alpha must be non-negative", "alpha", lines)

    if cfg["delta"] is None:
        s = math.sin(theta)
        delta = 1.0 / s if abs(s) > 1e-12 else 1.0
    else:
        delta = _number(cfg, "delta", lines)
        if delta < 0:
            _fail("delta must be non-negative", "delta", lines)

    w = _number(cfg, "w", lines)
    if w <= 0:
        _fail("w must be positive", "w", lines)
    v_sp = _number(cfg, "v_sp", lines)
    if v_sp < 0:
        _fail("v_sp must be non-negative", "v_sp", lines)

    widths = _number_list(cfg, "widths", lines)
    if any(x <= 0 for x in widths):
        _fail("widths must be positive", "widths", lines)
    speeds = _number_list(cfg, "spread_speeds", lines)
    if any(x < 0 for x in speeds):
        _fail("spread_speeds must be non-negative", "spread_speeds", lines)

    T = _number(cfg, "T", lines)
    if T <= 0:
        _fail("T must be positive", "T", lines)
    t = _number(cfg, "t", lines)
    if t < 0:
        _fail("t must be non-negative", "t", lines)

    times = cfg["times"]
    if not isinstance(times, dict) or set(times) != {"start", "stop", "step"}:
        _fail("times must be a mapping with start, stop and step", "times", lines)
    start, stop, step = (_number(times, k, lines) for k in ("start", "stop", "step"))
    if start < 0 or step <= 0 or stop <= start:
        _fail("times needs 0 <= start < stop and step > 0", "times", lines)

    window = _number_list(cfg, "tail_window", lines)
    if len(window) != 2 or window[0] >= window[1]:
        _fail("tail_window must be [start, stop] with start < stop", "tail_window", lines)

    ratio = _number(cfg, "w_over_rso", lines)
    if ratio <= 0:
        _fail("w_over_rso must be positive", "w_over_rso", lines)

    steps = cfg["trotter_steps"]
    if (not isinstance(steps, list) or not steps
            or any(isinstance(L, bool) or not isinstance(L, int) or L < 1 for L in steps)):
        _fail("trotter_steps must be a list of positive integers", "trotter_steps", lines)

    points = cfg["grid_points"]
    if points is not None and (isinstance(points, bool) or not isinstance(points, int)
                               or points < 2 or points & (points - 1)):
        _fail("grid_points must be a power of two", "grid_points", lines)
    extent = cfg["grid_extent"]
    if extent is not None:
        extent = _number(cfg, "grid_extent", lines)
        if extent <= 0:
            _fail("grid_extent must be positive", "grid_extent", lines)

    formats = cfg["formats"]
    if isinstance(formats, str):
        formats = [formats]
    if not isinstance(formats, list) or any(f not in SUPPORTED_FORMATS for f in formats):
        _fail(f"formats must be a subset of {', '.join(SUPPORTED_FORMATS)}", "formats", lines)

    if not isinstance(cfg["strict"], bool):
        _fail("strict must be true or false", "strict", lines)
    level = str(cfg["log_level"]).lower()
    if level not in LOG_LEVELS:
        _fail(f"log_level must be one of {', '.join(LOG_LEVELS)}", "log_level", lines)

    return ScenarioConfig(
        scenario=cfg["scenario"],
        theta=theta,
        beta=beta,
        phi=phi,
        alpha=alpha,
        delta=delta,
        w=w,
        v_sp=v_sp,
        widths=widths,
        spread_speeds=speeds,
        T=T,
        t=t,
        times=(start, stop, step),
        tail_window=(window[0], window[1]),
        w_over_rso=ratio,
        trotter_steps=tuple(steps),
        grid_points=points,
        grid_extent=extent,
        output_dir=str(cfg["output_dir"]),
        formats=tuple(dict.fromkeys(formats)),
        strict=cfg["strict"],
        log_level=level,
    )


def _die(message: str) -> None:
    print(f"[spinmeter] Config error: {message}", file=sys.stderr)
    sys.exit(2)
