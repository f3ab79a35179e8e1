"""Field sweeps (LAC spectra) and modulation-frequency sweeps (line intensity)."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import SteadyStateError
from .lockin import OBSERVABLES, Quadratures, best_phase, observable_values, quadratures, rotate_arrays
from .propagator import converge_n, fixed_point_residual, merge_physicality, physicality, solve_period
from .spin import ModelParams

log = logging.getLogger(__name__)

DEFAULT_START_N = 64
WINDOW_POINTS = 201
WINDOW_HALF_WIDTH = 10.0
REFINE_HALF_WIDTH = 2.0
REFINE_FACTOR = 3


@dataclass(frozen=True)
class PointResult:
    quadratures: dict
    physicality: dict
    residual: float


@dataclass(frozen=True)
class Spectrum:
    """Lock-in quadratures of one observable along a swept coordinate."""

    coordinate_kind: str
    coords: np.ndarray
    x: np.ndarray
    y: np.ndarray
    observable: str
    params_base: ModelParams
    phase_applied: float | None = None
    physicality: dict = field(default_factory=dict, compare=False)
    max_residual: float = 0.0

    def __post_init__(self):
        if len(self.coords) > 1 and not np.all(np.diff(self.coords) > 0):
            raise ValueError("spectrum coordinates must be strictly increasing")

    @property
    def points(self) -> list[tuple[float, Quadratures]]:
        return [(float(c), Quadratures(float(a), float(b), self.observable)) for c, a, b in zip(self.coords, self.x, self.y)]

    def rotated(self, phi: float) -> np.ndarray:
        return rotate_arrays(self.x, self.y, phi)

    def with_phase(self, phi: float) -> "Spectrum":
        return Spectrum(self.coordinate_kind, self.coords, self.x, self.y, self.observable,
                        self.params_base, phi, self.physicality, self.max_residual)


@dataclass(frozen=True)
class IntensityCurve:
    fm: np.ndarray
    intensity: dict  # observable -> array over fm
    phi_star: dict  # observable -> array over fm (radians)
    converged_n: np.ndarray
    spectra: dict  # fm -> {observable: Spectrum}
    params_base: ModelParams

    @property
    def physicality(self) -> dict:
        return merge_physicality(s.physicality for per_fm in self.spectra.values() for s in per_fm.values())


def evaluate_point(params: ModelParams, observables: Sequence[str] = OBSERVABLES) -> PointResult:
    prop = solve_period(params)
    states = prop.trajectory
    quads = {obs: quadratures(observable_values(states, obs), params.fm, obs) for obs in observables}
    rho0 = prop.sample(0)
    return PointResult(quads, physicality(states), fixed_point_residual(prop.monodromy, rho0))


def _evaluate_many(param_list, observables, threads):
    def run(p):
        try:
            return evaluate_point(p, observables)
        except SteadyStateError as exc:
            raise SteadyStateError(f"steady state failed at omega0={p.omega0}, fm={p.fm}: {exc}") from exc

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(run, param_list))
    return [run(p) for p in param_list]


def sweep_field_multi(
    base: ModelParams,
    omega0_grid: Iterable[float],
    observables: Sequence[str] = OBSERVABLES,
    threads: int = 1,
) -> dict:
    grid = np.asarray(list(omega0_grid), dtype=float)
    if grid.size == 0:
        raise ValueError("omega0 grid is empty")
    results = _evaluate_many([base.with_(omega0=float(w)) for w in grid], observables, threads)
    phys = merge_physicality(r.physicality for r in results)
    resid = max(r.residual for r in results)
    out = {}
    for obs in observables:
        x = np.array([r.quadratures[obs].x for r in results])
        y = np.array([r.quadratures[obs].y for r in results])
        out[obs] = Spectrum("omega0", grid, x, y, obs, base, None, phys, resid)
    return out


def sweep_field(
    base: ModelParams,
    omega0_grid: Iterable[float],
    observable: str = "electron_alpha_population",
    threads: int = 1,
) -> Spectrum:
    return sweep_field_multi(base, omega0_grid, [observable], threads)[observable]


def peak_to_peak(spectrum: Spectrum, phase: float) -> float:
    if len(spectrum.x) < 2:
        raise ValueError("peak_to_peak needs at least 2 points")
    return float(np.ptp(spectrum.rotated(phase)))


def _line_scale(base: ModelParams) -> float:
    return max(abs(base.v_perturb), abs(base.hfc), abs(base.omega1)) or 1.0


def field_window(base: ModelParams, points: int = WINDOW_POINTS) -> np.ndarray:
    half = WINDOW_HALF_WIDTH * _line_scale(base)
    return np.linspace(-half, half, points)


def refine_window(coarse: np.ndarray, centre: float, base: ModelParams) -> np.ndarray:
    """Add points at REFINE_FACTOR times the coarse density around ``centre``."""
    spacing = (coarse[-1] - coarse[0]) / (len(coarse) - 1)
    half = REFINE_HALF_WIDTH * (max(abs(base.v_perturb), abs(base.hfc)) or _line_scale(base))
    lo, hi = max(coarse[0], centre - half), min(coarse[-1], centre + half)
    fine_step = spacing / REFINE_FACTOR
    k0, k1 = math.ceil((lo - coarse[0]) / fine_step - 1e-9), math.floor((hi - coarse[0]) / fine_step + 1e-9)
    fine = coarse[0] + fine_step * np.arange(k0, k1 + 1)
    merged = np.sort(np.concatenate([coarse, fine]))
    keep = np.concatenate([[True], np.diff(merged) > 1e-9 * spacing])
    return merged[keep]


def _peak_coordinate(spec: Spectrum) -> float:
    return float(spec.coords[int(np.argmax(np.hypot(spec.x, spec.y)))])


def peak_extractor(omega0: float, observable: str):
    """Extractor for converge_n: (X, Y) of ``observable`` at a fixed field."""

    def extract(params: ModelParams):
        q = evaluate_point(params.with_(omega0=omega0), [observable]).quadratures[observable]
        return q.x, q.y

    return extract


def sweep_modulation(
    base: ModelParams,
    fm_grid: Iterable[float],
    observables: Sequence[str] | str = "electron_alpha_population",
    threads: int = 1,
    start_n: int = DEFAULT_START_N,
    auto_n: bool = True,
    rel_tol: float = 0.01,
    window: Sequence[float] | None = None,
) -> IntensityCurve:
    """Best-phase peak-to-peak line intensity as a function of fm.

    For each fm: a coarse field scan at the starting N locates the line
    extremum, converge_n fixes N there (first observable), and the full
    refined field window is evaluated at that N.
    """
    if isinstance(observables, str):
        observables = [observables]
    fms = np.asarray(list(fm_grid), dtype=float)
    if fms.size == 0:
        raise ValueError("fm grid is empty")
    lead = observables[0]
    coarse = field_window(base) if window is None else np.asarray(window, dtype=float)
    intensity = {o: [] for o in observables}
    phis = {o: [] for o in observables}
    ns, spectra = [], {}
    for fm in fms:
        p = base.with_(fm=float(fm), n_steps=start_n if auto_n else base.n_steps)
        scout = sweep_field(p, coarse, lead, threads)
        centre = _peak_coordinate(scout)
        if auto_n:
            p = converge_n(p, peak_extractor(centre, lead), rel_tol=rel_tol)
        grid = refine_window(coarse, centre, base)
        specs = sweep_field_multi(p, grid, observables, threads)
        for o in observables:
            if np.any(specs[o].x) or np.any(specs[o].y):
                phi = best_phase(specs[o])
            else:
                phi = 0.0
            specs[o] = specs[o].with_phase(phi)
            phis[o].append(phi)
            intensity[o].append(peak_to_peak(specs[o], phi))
        ns.append(p.n_steps)
        spectra[float(fm)] = specs
        log.info("fm=%g N=%d intensity(%s)=%.4g", fm, p.n_steps, lead, intensity[lead][-1])
    return IntensityCurve(
        fms,
        {o: np.array(v) for o, v in intensity.items()},
        {o: np.array(v) for o, v in phis.items()},
        np.array(ns),
        spectra,
        base,
    )
