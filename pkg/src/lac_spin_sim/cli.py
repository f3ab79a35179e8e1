"""Command-line front end.

    lac-spin-sim --config run.cfg [--threads N] [--output PATH] [--verbose]

Exit status: 0 success, 1 configuration error, 2 step-count convergence
failure, 3 steady-state failure, 4 I/O error, 5 other simulation error.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, parse_config
from .errors import ConfigError, ConvergenceError, SimulationError, SteadyStateError
from .lockin import best_phase, observable_values
from .propagator import converge_n, solve_period
from .sweep import (
    DEFAULT_START_N,
    _peak_coordinate,
    peak_extractor,
    peak_to_peak,
    sweep_field,
    sweep_field_multi,
    sweep_modulation,
)

log = logging.getLogger("lac_spin_sim")

EXIT_OK, EXIT_PARSE, EXIT_CONVERGENCE, EXIT_STEADY, EXIT_IO, EXIT_OTHER = 0, 1, 2, 3, 4, 5
HEADER = f"# lac-spin-sim v{__version__}"


def fmt(value) -> str:
    """Canonical cell text: integers verbatim, floats with 12 significant digits."""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    v = float(value)
    if v == 0:
        v = 0.0  # no negative zero
    return f"{v:.11e}"


def write_table(path, columns, rows) -> None:
    lines = [HEADER, ",".join(columns)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def read_table(path) -> tuple[list[str], list[list]]:
    lines = Path(path).read_text().splitlines()
    body = [ln for ln in lines if not ln.startswith("#")]
    columns = body[0].split(",")
    rows = []
    for ln in body[1:]:
        cells = []
        for cell in ln.split(","):
            cells.append(int(cell) if cell.lstrip("-").isdigit() else float(cell))
        rows.append(cells)
    return columns, rows


def write_plot_data(path, coord_name, coords, traces: dict) -> None:
    """Gnuplot-style blocks: one two-column block per trace, separated by blank lines."""
    blocks = []
    for name, values in traces.items():
        lines = [f"# {coord_name} {name}"]
        lines += [f"{fmt(c)} {fmt(v)}" for c, v in zip(coords, values)]
        blocks.append("\n".join(lines))
    Path(path).write_text(HEADER + "\n" + "\n\n\n".join(blocks) + "\n")


def _phase_for(cfg: RunConfig, spectrum) -> float:
    if cfg.phase_policy == "best_phase":
        if not (np.any(spectrum.x) or np.any(spectrum.y)):
            return 0.0
        return best_phase(spectrum)
    if cfg.phase_policy == "fixed":
        return math.radians(cfg.phase_deg)
    return 0.0


def _auto_n(params, grid, observable, threads):
    scout = sweep_field(params.with_(n_steps=DEFAULT_START_N), grid, observable, threads)
    centre = _peak_coordinate(scout)
    return converge_n(params.with_(n_steps=DEFAULT_START_N), peak_extractor(centre, observable))


def run_spectrum(cfg: RunConfig, output: str, threads: int) -> dict:
    grid = cfg.grid.coordinates()
    params = cfg.model
    if cfg.auto_n:
        params = _auto_n(params, grid, cfg.observables[0], threads)
    specs = sweep_field_multi(params, grid, cfg.observables, threads)
    columns, cols_data, summary = ["omega0"], [grid], {"N": params.n_steps}
    traces = {}
    for obs in cfg.observables:
        s = specs[obs]
        phi = _phase_for(cfg, s)
        xp = s.rotated(phi)
        columns += [f"X_{obs}", f"Y_{obs}", f"Xprime_{obs}"]
        cols_data += [s.x, s.y, xp]
        traces.update({f"X_{obs}": s.x, f"Y_{obs}": s.y, f"Xprime_{obs}": xp})
        summary[obs] = {"phi_deg": math.degrees(phi), "peak_to_peak": peak_to_peak(s, phi)}
    summary["physicality"] = specs[cfg.observables[0]].physicality
    rows = list(zip(*cols_data))
    write_table(output, columns, rows)
    if cfg.emit_plot_data:
        write_plot_data(_plot_path(output), "omega0", grid, traces)
    return summary


def run_freqsweep(cfg: RunConfig, output: str, threads: int) -> dict:
    fms = cfg.grid.coordinates()
    window = cfg.omega0_window.coordinates() if cfg.omega0_window else None
    curve = sweep_modulation(
        cfg.model, fms, list(cfg.observables), threads,
        auto_n=cfg.auto_n, window=window,
    )
    single = len(cfg.observables) == 1
    columns = ["fm"] + [f"intensity_{o}" for o in cfg.observables]
    columns += ["phi_star_deg"] if single else [f"phi_star_deg_{o}" for o in cfg.observables]
    columns.append("converged_N")
    rows = []
    for i, fm in enumerate(fms):
        row = [fm] + [curve.intensity[o][i] for o in cfg.observables]
        row += [math.degrees(curve.phi_star[o][i]) for o in cfg.observables]
        row.append(int(curve.converged_n[i]))
        rows.append(row)
    write_table(output, columns, rows)
    if cfg.emit_plot_data:
        traces = {f"intensity_{o}": curve.intensity[o] for o in cfg.observables}
        write_plot_data(_plot_path(output), "fm", fms, traces)
    return {
        "N": {float(f): int(n) for f, n in zip(fms, curve.converged_n)},
        "intensity": {o: dict(zip(map(float, fms), map(float, curve.intensity[o]))) for o in cfg.observables},
        "physicality": curve.physicality,
    }


def run_trajectory(cfg: RunConfig, output: str, threads: int) -> dict:
    params = cfg.model
    if cfg.auto_n:
        params = converge_n(params.with_(n_steps=DEFAULT_START_N), peak_extractor(params.omega0, cfg.observables[0]))
    prop = solve_period(params)
    columns = ["t"] + list(cfg.observables)
    cols = [prop.times] + [observable_values(prop.trajectory, o) for o in cfg.observables]
    write_table(output, columns, list(zip(*cols)))
    if cfg.emit_plot_data:
        write_plot_data(_plot_path(output), "t", prop.times, dict(zip(cfg.observables, cols[1:])))
    return {"N": params.n_steps, "physicality": prop.physicality()}


def _plot_path(output: str) -> str:
    p = Path(output)
    return str(p.with_name(p.stem + ".plot.dat"))


RUNNERS = {"spectrum": run_spectrum, "freqsweep": run_freqsweep, "trajectory": run_trajectory}


def run(cfg: RunConfig, threads: int = 1, output: str | None = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    output = output or cfg.output_path
    if not output:
        print("error: no output path (set 'output' in the config or pass --output)", file=sys.stderr)
        return EXIT_PARSE
    threads = threads or os.cpu_count() or 1
    start = time.perf_counter()
    try:
        summary = RUNNERS[cfg.mode](cfg, output, threads)
    except ConvergenceError as exc:
        print(f"convergence error: {exc} (last values {exc.previous} -> {exc.last})", file=sys.stderr)
        return EXIT_CONVERGENCE
    except SteadyStateError as exc:
        print(f"steady-state error: {exc}", file=sys.stderr)
        return EXIT_STEADY
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SimulationError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_OTHER
    wall = time.perf_counter() - start
    print(f"mode: {cfg.mode}", file=stdout)
    print(f"output: {output}", file=stdout)
    print(f"converged N: {summary.pop('N')}", file=stdout)
    for key, value in summary.items():
        print(f"{key}: {value}", file=stdout)
    print(f"wall time: {wall:.2f} s", file=stdout)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def main(argv=None) -> int:
    parser = _Parser(prog="lac-spin-sim", description="Lock-in LAC spectra of a pumped electron-nuclear spin pair")
    parser.add_argument("--config", required=True, help="flat key = value run configuration")
    parser.add_argument("--threads", type=int, default=1, help="worker threads for sweep points (0 = auto)")
    parser.add_argument("--output", help="output CSV path (overrides the config)")
    parser.add_argument("--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 0:
        print("error: --threads must be >= 0", file=sys.stderr)
        return EXIT_PARSE
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        cfg = parse_config(text)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    return run(cfg, args.threads, args.output)


if __name__ == "__main__":
    sys.exit(main())
