"""Lock-in detector emulation: observables, Fourier quadratures and phase.

X is the cosine and Y the sine component of an observable over one period,
both normalised by 1/T, so a pure ``c*sin`` signal gives Y = c/2.  The phase
reference is t = 0 of the cosine-modulated Hamiltonian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import InsufficientResolutionError, UndefinedPhaseError

if TYPE_CHECKING:
    from .propagator import PeriodPropagation
    from .sweep import Spectrum

OBSERVABLES = ("electron_alpha_population", "electron_polarization", "nuclear_polarization")

MIN_SAMPLES = 8


@dataclass(frozen=True)
class Quadratures:
    x: float
    y: float
    observable: str = "electron_alpha_population"

    @property
    def magnitude(self) -> float:
        return math.hypot(self.x, self.y)


def observable_values(states: np.ndarray, which: str) -> np.ndarray:
    """Evaluate an observable on a stack of 4x4 density matrices."""
    states = np.asarray(states)
    if which == "electron_alpha_population":
        return (states[..., 0, 0] + states[..., 1, 1]).real
    if which == "electron_polarization":
        return (states[..., 0, 0] + states[..., 1, 1]).real - 0.5
    if which == "nuclear_polarization":
        # <I_z> with m_I = -1/2 on indices 0 and 2
        return 0.5 * (states[..., 1, 1] + states[..., 3, 3] - states[..., 0, 0] - states[..., 2, 2]).real
    raise ValueError(f"unknown observable {which!r}; expected one of {OBSERVABLES}")


def observable_series(traj: PeriodPropagation, which: str) -> np.ndarray:
    if len(traj.trajectory) == 0:
        raise ValueError("empty trajectory")
    return observable_values(traj.trajectory, which)


def quadratures(series, fm: float, observable: str = "electron_alpha_population") -> Quadratures:
    """Trapezoidal X and Y of a series sampled on a uniform grid over one period.

    The series must include both endpoints, t = 0 and t = T.  The result does
    not depend on ``fm`` beyond the phase reference, since the 1/T prefactor
    cancels the length of the interval.
    """
    s = np.asarray(series, dtype=float)
    if s.ndim != 1 or len(s) < MIN_SAMPLES:
        raise InsufficientResolutionError(f"need at least {MIN_SAMPLES} samples over the period, got {len(s)}")
    if not fm > 0:
        raise ValueError("fm must be positive")
    n = len(s) - 1
    theta = 2 * np.pi * np.arange(n + 1) / n
    w = np.full(n + 1, 1.0 / n)
    w[0] = w[-1] = 0.5 / n
    ws = w * s
    return Quadratures(float(ws @ np.cos(theta)), float(ws @ np.sin(theta)), observable)


def phase_rotate(q: Quadratures, phi: float) -> float:
    return q.x * math.cos(phi) + q.y * math.sin(phi)


def rotate_arrays(x: np.ndarray, y: np.ndarray, phi: float) -> np.ndarray:
    return np.asarray(x) * math.cos(phi) + np.asarray(y) * math.sin(phi)


def _ptp_at(x, y, phi):
    return float(np.ptp(rotate_arrays(x, y, phi)))


def best_phase(spectrum: Spectrum, tol: float = 1e-10) -> float:
    """Lock-in phase in [0, pi) maximising the peak-to-peak of X'.

    Starts from the principal axis of the (X, Y) point cloud, then refines with
    a golden-section search on a bracket around it.  A coarse scan guards
    against the principal axis landing on a secondary maximum.
    """
    x = np.asarray(spectrum.x, dtype=float)
    y = np.asarray(spectrum.y, dtype=float)
    if len(x) < 3:
        raise ValueError("best_phase needs at least 3 spectrum points")
    if not (np.any(x) or np.any(y)):
        raise UndefinedPhaseError("all-zero spectrum has no preferred phase")

    xc, yc = x - x.mean(), y - y.mean()
    cov = np.array([[xc @ xc, xc @ yc], [xc @ yc, yc @ yc]])
    _, vecs = np.linalg.eigh(cov)
    major = vecs[:, -1]
    start = math.atan2(major[1], major[0]) % math.pi

    scan = np.linspace(0.0, math.pi, 181, endpoint=False)
    candidates = [start] + list(scan)
    values = [_ptp_at(x, y, p) for p in candidates]
    centre = candidates[int(np.argmax(values))]

    step = math.pi / 180
    a, b = centre - step, centre + step
    g = (math.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = _ptp_at(x, y, c), _ptp_at(x, y, d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = _ptp_at(x, y, c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = _ptp_at(x, y, d)
    best = (a + b) / 2
    # the objective is flat to rounding near its maximum; prefer the exact scan point on ties
    if _ptp_at(x, y, centre) >= _ptp_at(x, y, best):
        best = centre
    best %= math.pi
    # golden-section accuracy is about sqrt(eps); snap values that close to pi back to 0
    if math.pi - best < 1e-7:
        best = 0.0
    return best
