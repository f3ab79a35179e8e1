"""Run configuration: flat ``key = value`` files.

Example::

    # spectrum at the lowest modulation frequency
    mode = spectrum
    v_perturb = 0.1
    hfc = 0.2
    omega1 = 0.1
    fm = 0.01
    r1 = 0.1
    r2 = 0.1
    pump = 0.01
    grid = -2:2:201
    observables = electron_alpha_population, nuclear_polarization
    phase_policy = best_phase
    output = spectrum.csv

Keys are case-insensitive.  ``grid`` is either ``start:stop:count`` or a
comma-separated list.  ``n_steps`` is the only physics/numerics key with a
default (``auto``: doubling until converged).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .lockin import OBSERVABLES
from .spin import ModelParams

MODES = ("spectrum", "freqsweep", "trajectory")
PHYSICS = ("omega0", "v_perturb", "hfc", "omega1", "fm", "r1", "r2", "pump")
SWEPT = {"spectrum": "omega0", "freqsweep": "fm", "trajectory": None}
OPTIONAL = ("n_steps", "grid_spacing", "observables", "phase_policy", "output", "emit_plot_data")
KNOWN = ("mode", "grid", "omega0_window") + PHYSICS + OPTIONAL


@dataclass(frozen=True)
class Grid:
    values: tuple = ()
    start: float | None = None
    stop: float | None = None
    count: int | None = None
    spacing: str = "linear"

    @property
    def is_range(self) -> bool:
        return self.count is not None

    def coordinates(self) -> np.ndarray:
        if not self.is_range:
            return np.array(self.values, dtype=float)
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)

    def text(self) -> str:
        if self.is_range:
            return f"{self.start!r}:{self.stop!r}:{self.count}"
        return ", ".join(repr(v) for v in self.values)


@dataclass(frozen=True)
class RunConfig:
    mode: str
    model: ModelParams
    grid: Grid | None
    observables: tuple
    phase_policy: str  # raw_xy | best_phase | fixed
    phase_deg: float | None
    output_path: str | None
    emit_plot_data: bool
    auto_n: bool
    omega0_window: Grid | None = None  # freqsweep only; None means the automatic window


def _number(text, line, key):
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"malformed number {text!r}", line, key) from None
    if not math.isfinite(value):
        raise ConfigError(f"non-finite number {text!r}", line, key)
    return value


def _grid(text, line, key, spacing="linear"):
    text = text.strip()
    if ":" in text:
        parts = [p.strip() for p in text.split(":")]
        if len(parts) != 3:
            raise ConfigError("range grid must be start:stop:count", line, key)
        start, stop = _number(parts[0], line, key), _number(parts[1], line, key)
        try:
            count = int(parts[2])
        except ValueError:
            raise ConfigError(f"grid count {parts[2]!r} is not an integer", line, key) from None
        if count < 2:
            raise ConfigError("grid count must be at least 2", line, key)
        if not stop > start:
            raise ConfigError("grid stop must exceed start", line, key)
        return Grid(start=start, stop=stop, count=count, spacing=spacing)
    values = tuple(_number(p.strip(), line, key) for p in text.split(",") if p.strip())
    if len(values) < 2:
        raise ConfigError("grid needs at least 2 values", line, key)
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError("grid values must be strictly increasing", line, key)
    return Grid(values=values, spacing=spacing)


def parse_config(text: str) -> RunConfig:
    raw: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"expected 'key = value', got {stripped!r}", lineno)
        key, value = (s.strip() for s in stripped.split("=", 1))
        key = key.lower()
        if key not in KNOWN:
            raise ConfigError("unknown key", lineno, key)
        if key in raw:
            raise ConfigError(f"duplicate key (first set on line {raw[key][1]})", lineno, key)
        if not value:
            raise ConfigError("empty value", lineno, key)
        raw[key] = (value, lineno)

    if "mode" not in raw:
        required = ["mode", "v_perturb", "hfc", "omega1", "r1", "r2", "pump"]
        missing = [k for k in required if k not in raw]
        raise ConfigError(
            f"missing required keys: {', '.join(missing)} (plus grid, omega0 or fm depending on mode)"
        )
    mode_text, mode_line = raw["mode"]
    mode = mode_text.lower()
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}", mode_line, "mode")
    swept = SWEPT[mode]

    required = [k for k in PHYSICS if k != swept]
    if mode != "trajectory":
        required.append("grid")
    if mode == "freqsweep":
        required.append("omega0_window")
    missing = [k for k in required if k not in raw]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")
    if swept and swept in raw:
        raise ConfigError(f"{swept} is the swept coordinate in {mode} mode; set it through grid", raw[swept][1], swept)
    if mode == "trajectory" and "grid" in raw:
        raise ConfigError("trajectory mode takes no grid", raw["grid"][1], "grid")
    if mode != "freqsweep" and "omega0_window" in raw:
        raise ConfigError("omega0_window only applies to freqsweep mode", raw["omega0_window"][1], "omega0_window")

    spacing = "linear"
    if "grid_spacing" in raw:
        spacing, line = raw["grid_spacing"]
        spacing = spacing.lower()
        if spacing not in ("linear", "log"):
            raise ConfigError("grid_spacing must be linear or log", line, "grid_spacing")
    grid = _grid(raw["grid"][0], raw["grid"][1], "grid", spacing) if "grid" in raw else None
    if grid is not None and mode == "freqsweep" and np.any(grid.coordinates() <= 0):
        raise ConfigError("modulation frequencies must be positive", raw["grid"][1], "grid")

    window = None
    if "omega0_window" in raw:
        text, line = raw["omega0_window"]
        if text.lower() != "auto":
            window = _grid(text, line, "omega0_window")

    values = {k: _number(raw[k][0], raw[k][1], k) for k in PHYSICS if k in raw}
    if swept:
        values[swept] = float(grid.coordinates()[0])

    auto_n = True
    n_steps = 64
    if "n_steps" in raw:
        text, line = raw["n_steps"]
        if text.lower() != "auto":
            try:
                n_steps = int(text)
            except ValueError:
                raise ConfigError(f"n_steps must be an integer or 'auto', got {text!r}", line, "n_steps") from None
            auto_n = False
    try:
        model = ModelParams(n_steps=n_steps, **values)
    except ValueError as exc:
        line = raw["n_steps"][1] if "n_steps" in raw and "n_steps" in str(exc) else None
        raise ConfigError(str(exc), line) from None

    observables = ("electron_alpha_population",)
    if "observables" in raw:
        text, line = raw["observables"]
        observables = tuple(o.strip().lower() for o in text.split(",") if o.strip())
        bad = [o for o in observables if o not in OBSERVABLES]
        if bad or not observables:
            raise ConfigError(f"unknown observable(s) {bad}; choose from {OBSERVABLES}", line, "observables")
        if len(set(observables)) != len(observables):
            raise ConfigError("repeated observable", line, "observables")

    policy, phase_deg = "raw_xy", None
    if "phase_policy" in raw:
        text, line = raw["phase_policy"]
        text = text.lower().replace(" ", "")
        if text in ("raw_xy", "best_phase"):
            policy = text
        elif text.startswith("fixed(") and text.endswith(")"):
            policy = "fixed"
            phase_deg = _number(text[6:-1], line, "phase_policy")
        else:
            raise ConfigError("phase_policy must be raw_xy, best_phase or fixed(<degrees>)", line, "phase_policy")

    emit = False
    if "emit_plot_data" in raw:
        text, line = raw["emit_plot_data"]
        if text.lower() not in ("true", "false", "yes", "no", "1", "0"):
            raise ConfigError("emit_plot_data must be true or false", line, "emit_plot_data")
        emit = text.lower() in ("true", "yes", "1")

    output = raw["output"][0] if "output" in raw else None
    return RunConfig(mode, model, grid, observables, policy, phase_deg, output, emit, auto_n, window)


def serialize_config(cfg: RunConfig) -> str:
    """Inverse of parse_config; numbers are written with repr so they round-trip exactly."""
    m = cfg.model
    swept = SWEPT[cfg.mode]
    lines = [f"mode = {cfg.mode}"]
    for k in PHYSICS:
        if k != swept:
            lines.append(f"{k} = {getattr(m, k)!r}")
    lines.append(f"n_steps = {'auto' if cfg.auto_n else m.n_steps}")
    if cfg.grid is not None:
        lines.append(f"grid = {cfg.grid.text()}")
        if cfg.grid.spacing != "linear":
            lines.append(f"grid_spacing = {cfg.grid.spacing}")
    if cfg.mode == "freqsweep":
        lines.append(f"omega0_window = {cfg.omega0_window.text() if cfg.omega0_window else 'auto'}")
    lines.append(f"observables = {', '.join(cfg.observables)}")
    policy = f"fixed({cfg.phase_deg!r})" if cfg.phase_policy == "fixed" else cfg.phase_policy
    lines.append(f"phase_policy = {policy}")
    if cfg.output_path:
        lines.append(f"output = {cfg.output_path}")
    lines.append(f"emit_plot_data = {'true' if cfg.emit_plot_data else 'false'}")
    return "\n".join(lines) + "\n"
