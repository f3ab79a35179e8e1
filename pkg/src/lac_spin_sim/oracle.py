"""Independent reference computations used by the test suite.

Nothing here calls the batched exponential, the superoperator assembly or the
period propagator: the integrator works on 4x4 matrices with the master
equation written out as commutators and dissipators, the exponential is a
plain Taylor sum, and the rate models are closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, interpolate

from .errors import IntegratorError
from .spin import DIM, LDIM, DensityMatrix, ModelParams, hamiltonian_at, jump_operators


@dataclass(frozen=True)
class OracleReport:
    quantity: str
    reference_value: np.ndarray
    candidate_value: np.ndarray
    max_abs_error: float
    tolerance: float
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.quantity}: max_abs_error={self.max_abs_error:.3e} tol={self.tolerance:.1e}"


def compare(quantity: str, reference, candidate, tolerance: float) -> OracleReport:
    ref = np.asarray(reference)
    cand = np.asarray(candidate)
    err = float(np.max(np.abs(ref - cand))) if ref.size else 0.0
    return OracleReport(quantity, ref, cand, err, tolerance, err <= tolerance)


def master_rhs(h: np.ndarray, jumps, rho: np.ndarray) -> np.ndarray:
    """-i[H, rho] + sum_k rate_k D[c_k] rho on a stack of 4x4 matrices."""
    out = -1j * (h @ rho - rho @ h)
    for c, rate in jumps:
        if rate:
            cd = c.conj().T
            cdc = cd @ c
            out = out + rate * (c @ rho @ cd - 0.5 * (cdc @ rho + rho @ cdc))
    return out


def _rk4_step(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + h / 2, y + h / 2 * k1)
    k3 = f(t + h / 2, y + h / 2 * k2)
    k4 = f(t + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def rk4_period_map(params: ModelParams, substeps: int, piecewise: bool = True) -> np.ndarray:
    """One-period map on vec(rho), built by RK4-integrating all 16 matrix units.

    With ``piecewise`` the Hamiltonian is held at the left edge of each of the
    n_steps propagation intervals (the dynamics the propagator discretises);
    otherwise H(t) is evaluated at every RK4 stage time.
    """
    n = params.n_steps
    per_interval = max(1, math.ceil(substeps / n))
    h = params.dt / per_interval
    jumps = jump_operators(params)
    y = np.eye(LDIM, dtype=complex).reshape(LDIM, DIM, DIM)
    if piecewise:
        for k in range(n):
            hk = hamiltonian_at(params, k * params.dt)

            def f(t, r, hk=hk):
                return master_rhs(hk, jumps, r)

            for _ in range(per_interval):
                y = _rk4_step(f, 0.0, y, h)
    else:
        def f(t, r):
            return master_rhs(hamiltonian_at(params, t), jumps, r)

        for j in range(n * per_interval):
            y = _rk4_step(f, j * h, y, h)
    return y.reshape(LDIM, LDIM).T


def rk4_integrate(
    params: ModelParams,
    rho0: DensityMatrix,
    n_periods: int | None,
    substeps: int,
    piecewise: bool = True,
) -> DensityMatrix:
    """State after ``n_periods`` periods of RK4 integration.

    ``substeps`` is the number of RK4 steps per period.  The one-period RK4
    map is applied ``n_periods`` times by binary powering, which is the same
    linear map as stepping period after period.  ``n_periods=None`` runs the
    burn-in length from ``burn_in_periods`` using that map.
    """
    if substeps < 10 * params.n_steps:
        raise ValueError("rk4_integrate needs substeps >= 10 * n_steps")
    if n_periods is not None and n_periods < 0:
        raise ValueError("n_periods must be non-negative")
    step_map = rk4_period_map(params, substeps, piecewise)
    if n_periods is None:
        n_periods = burn_in_periods(params, step_map)
    v = rho0.vec.copy()
    power = step_map
    k = n_periods
    with np.errstate(over="ignore", invalid="ignore"):
        while k:
            if k & 1:
                v = power @ v
            k >>= 1
            if k:
                power = power @ power
    rho = v.reshape(DIM, DIM)
    drift = abs(np.trace(rho) - np.trace(rho0.elements))
    if not drift <= 1e-6:
        raise IntegratorError(f"RK4 trace drift {drift:.3e} exceeds 1e-6")
    return DensityMatrix(rho)


def burn_in_periods(params: ModelParams, period_map: np.ndarray | None = None) -> int:
    """Periods for the slowest mode to decay by e^-20 (at least 200).

    The named rates alone underestimate this: the nucleus has no relaxation
    of its own and settles only through hyperfine mixing, which can be far
    slower.  Given the oracle's own one-period map, its second-largest
    eigenvalue modulus bounds the slowest transient as well.
    """
    rates = [r for r in (params.r1, params.r2, params.pump) if r > 0]
    periods = 200
    if rates:
        periods = max(periods, math.ceil(20 / (min(rates) * params.period)))
    if period_map is not None:
        mods = np.sort(np.abs(np.linalg.eigvals(period_map)))[::-1]
        slow = mods[1] if len(mods) > 1 else 0.0
        if slow >= 1.0:
            raise IntegratorError("one-period map has no unique attracting state")
        if slow > 0:
            periods = max(periods, math.ceil(20 / -math.log(slow)))
    return periods


def taylor_expm(m: np.ndarray, terms: int) -> tuple[np.ndarray, float]:
    """Partial Taylor sum of exp(m) and a bound on the truncation remainder."""
    m = np.asarray(m, dtype=complex)
    total = np.eye(m.shape[0], dtype=complex)
    term = total.copy()
    for k in range(1, terms + 1):
        term = term @ m / k
        total = total + term
    norm = float(np.linalg.norm(m, 2))
    bound = norm ** (terms + 1) / math.factorial(terms + 1) * math.exp(norm)
    return total, bound


def scaled_taylor_expm(m: np.ndarray, terms: int = 30) -> tuple[np.ndarray, float]:
    """Taylor sum on m/2^s with ||m/2^s|| <= 1, squared back s times.

    The returned bound propagates the Taylor remainder through the squarings:
    ||X^(2^s) - Y^(2^s)|| <= 2^s ||X - Y|| max(||X||, ||Y||)^(2^s - 1).
    """
    m = np.asarray(m, dtype=complex)
    norm = float(np.linalg.norm(m, 2))
    s = max(0, math.ceil(math.log2(norm))) if norm > 1 else 0
    val, rem = taylor_expm(m / 2**s, terms)
    for _ in range(s):
        val = val @ val
    growth = math.exp(norm / 2**s) + rem
    bound = 2**s * rem * growth ** (2**s - 1) if s else rem
    return val, bound


def two_state_rate_model(r1: float, pump: float, t: float, p_alpha0: float) -> float:
    """Closed form of dp/dt = -(pump + r1/2) p + (r1/2)(1 - p) for the alpha population."""
    if r1 < 0 or pump < 0:
        raise ValueError("rates must be non-negative")
    k = r1 + pump
    if k == 0:
        return p_alpha0
    p_inf = (r1 / 2) / k
    return p_inf + (p_alpha0 - p_inf) * math.exp(-k * t)


def exhaustive_phase_scan(x, y, step_deg: float = 0.1) -> tuple[float, float]:
    """Grid search over [0, 180) degrees for the phase maximising peak-to-peak."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    phis = np.radians(np.arange(0.0, 180.0, step_deg))
    rotated = np.outer(np.cos(phis), x) + np.outer(np.sin(phis), y)
    ptp = rotated.max(axis=1) - rotated.min(axis=1)
    i = int(np.argmax(ptp))
    return float(phis[i]), float(ptp[i])


def spline_quadratures(series, fm: float) -> tuple[float, float]:
    """X and Y from adaptive quadrature of a periodic cubic spline through the samples."""
    s = np.asarray(series, dtype=float)
    n = len(s) - 1
    period = 1.0 / fm
    t = np.linspace(0.0, period, n + 1)
    periodic = abs(s[0] - s[-1]) < 1e-8
    if periodic:
        s = s.copy()
        s[-1] = s[0]
    spline = interpolate.CubicSpline(t, s, bc_type="periodic" if periodic else "not-a-knot")
    w = 2 * np.pi * fm
    opts = dict(limit=max(200, 4 * n), epsabs=1e-13, epsrel=1e-12)
    x, _ = integrate.quad(lambda tt: spline(tt) * math.cos(w * tt), 0.0, period, **opts)
    y, _ = integrate.quad(lambda tt: spline(tt) * math.sin(w * tt), 0.0, period, **opts)
    return x / period, y / period
