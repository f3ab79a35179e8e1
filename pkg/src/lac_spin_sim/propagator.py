"""One-period propagation, periodic steady state and step-count control.

A modulation period T = 1/fm is cut into N equal steps.  Within step k the
generator is frozen at the step's left edge t_k = k*T/N and the state is moved
by exp(L(t_k) dt).  The product of the N step propagators is the one-period
map U, whose fixed point (with unit trace) is the periodic steady state.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Literal

import numpy as np

from .errors import ConvergenceError, SteadyStateError
from .expm import matrix_exp
from .spin import (
    DIM,
    LDIM,
    DensityMatrix,
    ModelParams,
    SuperOperator,
    liouvillian_at,
    liouvillian_parts,
    trace_row,
)

log = logging.getLogger(__name__)

CHUNK = 4096
# above this many steps the step propagators are recomputed for the
# trajectory pass instead of being held in memory (16x16 complex = 4 KiB each)
KEEP_LIMIT = 1 << 16
MAX_STEPS = 4_000_000
TRACE_INDEX = LDIM - 1  # vec index of rho[bb, bb]
DEGENERACY_TOL = 1e-11

Sampling = Literal["left", "midpoint"]


@dataclass(frozen=True)
class PeriodPropagation:
    """Result of propagating the state across one modulation period."""

    monodromy: SuperOperator
    trajectory: np.ndarray  # (N+1, 4, 4), sample k at t_k = k*T/N
    params_used: ModelParams

    @property
    def times(self) -> np.ndarray:
        n = self.params_used.n_steps
        return np.arange(n + 1) * self.params_used.dt

    def sample(self, k: int) -> DensityMatrix:
        return DensityMatrix(self.trajectory[k])

    def physicality(self) -> dict:
        """Worst-case invariant violations over every trajectory sample."""
        return physicality(self.trajectory)


def physicality(states: np.ndarray) -> dict:
    herm = np.abs(states - np.conj(np.swapaxes(states, -1, -2))).max()
    trace = np.abs(np.trace(states, axis1=-2, axis2=-1) - 1).max()
    sym = (states + np.conj(np.swapaxes(states, -1, -2))) / 2
    min_eig = np.linalg.eigvalsh(sym).min()
    return {"hermiticity": float(herm), "trace": float(trace), "min_eigenvalue": float(min_eig)}


def merge_physicality(reports) -> dict:
    reports = list(reports)
    if not reports:
        return {"hermiticity": 0.0, "trace": 0.0, "min_eigenvalue": 0.0}
    return {
        "hermiticity": max(r["hermiticity"] for r in reports),
        "trace": max(r["trace"] for r in reports),
        "min_eigenvalue": min(r["min_eigenvalue"] for r in reports),
    }


def step_propagator(params: ModelParams, t: float, dt: float) -> SuperOperator:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    return SuperOperator(matrix_exp(liouvillian_at(params, t).elements * dt), "propagator")


def _step_chunks(params: ModelParams, sampling: Sampling = "left", chunk: int = CHUNK) -> Iterator[np.ndarray]:
    """Yield the step propagators of one period in time order, ``chunk`` at a time."""
    static, modulated = liouvillian_parts(params)
    n = params.n_steps
    dt = params.dt
    offset = 0.5 if sampling == "midpoint" else 0.0
    for start in range(0, n, chunk):
        k = np.arange(start, min(start + chunk, n)) + offset
        amp = params.omega1 * np.cos(2 * np.pi * k / n)
        gens = (static * dt)[None] + (amp * dt)[:, None, None] * modulated[None]
        yield matrix_exp(gens)


def ordered_product(stack: np.ndarray) -> np.ndarray:
    """stack[-1] @ ... @ stack[0], reduced pairwise."""
    stack = np.asarray(stack)
    while len(stack) > 1:
        odd = stack[-1:] if len(stack) % 2 else None
        paired = stack[1 : len(stack) - (len(stack) % 2) : 2] @ stack[0 : len(stack) - 1 : 2]
        stack = paired if odd is None else np.concatenate([paired, odd])
    return stack[0]


def _monodromy(params, sampling, keep):
    u = np.eye(LDIM, dtype=complex)
    kept = []
    for steps in _step_chunks(params, sampling):
        u = ordered_product(steps) @ u
        if keep:
            kept.append(steps)
    return u, kept


def period_propagator(params: ModelParams, sampling: Sampling = "left") -> SuperOperator:
    u, _ = _monodromy(params, sampling, keep=False)
    return SuperOperator(u, "propagator")


def steady_state(
    u: SuperOperator | np.ndarray,
    cond_limit: float = 1e12,
    degenerate: Literal["raise", "project"] = "raise",
) -> DensityMatrix:
    """Unit-trace fixed point of the one-period map.

    The row of (U - 1) belonging to rho[bb, bb] is replaced by the trace
    condition.  If that system is ill-conditioned, the eigenvector of U with
    eigenvalue closest to 1 is used instead.  When eigenvalue 1 is degenerate
    the fixed point is not unique: by default this raises SteadyStateError;
    with ``degenerate="project"`` the maximally mixed state is projected onto
    the fixed-point eigenspace (its long-time limit) instead.
    """
    mat = u.elements if isinstance(u, SuperOperator) else np.asarray(u)
    system = mat - np.eye(LDIM)
    system[TRACE_INDEX] = trace_row()
    rhs = np.zeros(LDIM, dtype=complex)
    rhs[TRACE_INDEX] = 1.0
    if np.linalg.cond(system) <= cond_limit:
        vec = np.linalg.solve(system, rhs)
    else:
        log.debug("trace-replaced system ill-conditioned; using eigenvector fallback")
        vals, vecs = np.linalg.eig(mat)
        near_one = np.abs(vals - 1) < DEGENERACY_TOL
        if near_one.sum() > 1:
            if degenerate != "project":
                raise SteadyStateError(
                    f"one-period map has eigenvalue 1 with multiplicity {near_one.sum()}; "
                    "the periodic steady state is not unique"
                )
            left = np.linalg.inv(vecs)[near_one]
            vec = vecs[:, near_one] @ (left @ (np.eye(DIM).reshape(LDIM) / DIM))
        else:
            vec = vecs[:, int(np.argmin(np.abs(vals - 1)))]
        tr = trace_row() @ vec
        if abs(tr) < 1e-14:
            raise SteadyStateError("fixed-point eigenvector has zero trace")
        vec = vec / tr
    rho = vec.reshape(DIM, DIM)
    return DensityMatrix((rho + rho.conj().T) / 2)


def _trajectory(vec0: np.ndarray, chunks) -> np.ndarray:
    out = [vec0]
    v = vec0
    for steps in chunks:
        for p in steps:
            v = p @ v
            out.append(v)
    return np.array(out).reshape(-1, DIM, DIM)


def propagate_period(rho0: DensityMatrix, params: ModelParams, sampling: Sampling = "left") -> PeriodPropagation:
    keep = params.n_steps <= KEEP_LIMIT
    u, kept = _monodromy(params, sampling, keep)
    chunks = kept if keep else _step_chunks(params, sampling)
    traj = _trajectory(rho0.vec, chunks)
    return PeriodPropagation(SuperOperator(u, "propagator"), traj, params)


def solve_period(params: ModelParams, sampling: Sampling = "left") -> PeriodPropagation:
    """Steady-state trajectory over one period, computing each exponential once when possible."""
    keep = params.n_steps <= KEEP_LIMIT
    u, kept = _monodromy(params, sampling, keep)
    rho0 = steady_state(u)
    chunks = kept if keep else _step_chunks(params, sampling)
    traj = _trajectory(rho0.vec, chunks)
    return PeriodPropagation(SuperOperator(u, "propagator"), traj, params)


def fixed_point_residual(u: SuperOperator, rho: DensityMatrix) -> float:
    return float(np.linalg.norm(u.elements @ rho.vec - rho.vec))


def converge_n(
    params: ModelParams,
    observable_extractor: Callable[[ModelParams], tuple[float, float]],
    rel_tol: float = 0.01,
    max_steps: int = MAX_STEPS,
    abs_floor: float = 1e-15,
) -> ModelParams:
    """Double n_steps until the extracted (X, Y) pair moves by less than ``rel_tol``.

    The returned parameters carry the smallest tested N whose doubling changed
    the pair by less than ``rel_tol`` of its magnitude.
    """
    n = params.n_steps
    prev = np.asarray(observable_extractor(params), dtype=float)
    while True:
        if 2 * n > max_steps:
            raise ConvergenceError(
                f"no convergence below {max_steps} steps (fm={params.fm})",
                previous=tuple(prev_prev) if n > params.n_steps else None,
                last=tuple(prev),
                n_steps=n,
            )
        cur = np.asarray(observable_extractor(params.with_(n_steps=2 * n)), dtype=float)
        scale = max(math.hypot(*cur), math.hypot(*prev))
        change = math.hypot(*(cur - prev))
        log.debug("converge_n fm=%g N=%d -> %d change=%.3g scale=%.3g", params.fm, n, 2 * n, change, scale)
        if scale <= abs_floor or change < rel_tol * scale:
            return params.with_(n_steps=n)
        prev_prev, prev, n = prev, cur, 2 * n
