"""Spin algebra, Hamiltonian and Liouvillian of the electron-nuclear pair.

Conventions
-----------
- Product basis ``|m_S m_I>`` ordered (aa, ab, ba, bb), electron first, where
  ``a`` (alpha) is the ``m = -1/2`` state and ``b`` (beta) is ``m = +1/2`` for
  both spins.
- Density matrices are vectorised row-major: element ``(i, j)`` sits at index
  ``4*i + j``.  With this layout ``vec(A rho B) = kron(A, B.T) @ vec(rho)``.
- Every coupling and rate is an angular frequency in arbitrary units; the
  modulation frequency ``fm`` is cyclic and always enters as ``2*pi*fm``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

DIM = 4
LDIM = DIM * DIM

_TOL_HERM = 1e-10
_TOL_TRACE = 1e-10
_TOL_EIG = -1e-8


@dataclass(frozen=True)
class ModelParams:
    """Physical and numerical parameters of one simulation point."""

    omega0: float
    v_perturb: float
    hfc: float
    omega1: float
    fm: float
    r1: float
    r2: float
    pump: float
    n_steps: int = 256

    def __post_init__(self):
        for name in ("omega0", "v_perturb", "hfc", "omega1", "fm", "r1", "r2", "pump"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.fm <= 0:
            raise ValueError(f"fm must be positive, got {self.fm}")
        if self.n_steps < 2 or int(self.n_steps) != self.n_steps:
            raise ValueError(f"n_steps must be an integer >= 2, got {self.n_steps}")
        for name in ("r1", "r2", "pump"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def period(self) -> float:
        return 1.0 / self.fm

    @property
    def dt(self) -> float:
        return self.period / self.n_steps

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class SpinOperatorSet:
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray
    ix: np.ndarray
    iy: np.ndarray
    iz: np.ndarray
    # electron raising operator S+ (alpha -> beta), tensored with the nuclear identity
    s_plus: np.ndarray = field(repr=False, default=None)


def _single_spin():
    sz = np.diag([-0.5, 0.5]).astype(complex)
    sp = np.array([[0, 0], [1, 0]], dtype=complex)  # |b><a|
    sm = sp.conj().T
    sx = (sp + sm) / 2
    sy = (sp - sm) / 2j
    return sx, sy, sz, sp


def build_spin_operators() -> SpinOperatorSet:
    sx, sy, sz, sp = _single_spin()
    eye = np.eye(2, dtype=complex)
    ops = [np.kron(a, eye) for a in (sx, sy, sz)] + [np.kron(eye, a) for a in (sx, sy, sz)]
    for op in ops:
        op.setflags(write=False)
    s_plus = np.kron(sp, eye)
    s_plus.setflags(write=False)
    return SpinOperatorSet(*ops, s_plus=s_plus)


SPIN = build_spin_operators()


@dataclass(frozen=True)
class DensityMatrix:
    """4x4 state of the electron-nuclear pair."""

    elements: np.ndarray

    @classmethod
    def from_vec(cls, vec: np.ndarray) -> "DensityMatrix":
        return cls(np.asarray(vec, dtype=complex).reshape(DIM, DIM))

    @classmethod
    def maximally_mixed(cls) -> "DensityMatrix":
        return cls(np.eye(DIM, dtype=complex) / DIM)

    @property
    def vec(self) -> np.ndarray:
        return self.elements.reshape(LDIM)

    def invariant_violations(self) -> dict:
        m = self.elements
        return {
            "hermiticity": float(np.abs(m - m.conj().T).max()),
            "trace": float(abs(np.trace(m) - 1.0)),
            "min_eigenvalue": float(np.linalg.eigvalsh((m + m.conj().T) / 2).min()),
        }

    def check(self) -> None:
        """Raise ``ValueError`` if the state is not a physical density matrix."""
        v = self.invariant_violations()
        if v["hermiticity"] > _TOL_HERM or v["trace"] > _TOL_TRACE or v["min_eigenvalue"] < _TOL_EIG:
            raise ValueError(f"unphysical density matrix: {v}")


@dataclass(frozen=True)
class SuperOperator:
    """16x16 generator or propagator acting on vectorised density matrices."""

    elements: np.ndarray
    kind: Literal["generator", "propagator"] = "generator"

    def __add__(self, other: "SuperOperator") -> "SuperOperator":
        if self.kind != "generator" or other.kind != "generator":
            raise TypeError("only generators can be added")
        return SuperOperator(self.elements + other.elements, "generator")

    def __matmul__(self, rho):
        if isinstance(rho, DensityMatrix):
            return DensityMatrix.from_vec(self.elements @ rho.vec)
        return self.elements @ rho

    def trace_defect(self) -> float:
        """Largest violation of trace preservation."""
        tr = trace_row()
        if self.kind == "generator":
            return float(np.abs(tr @ self.elements).max())
        return float(np.abs(tr @ self.elements - tr).max())


def trace_row() -> np.ndarray:
    """Row vector mapping vec(rho) to trace(rho)."""
    return np.eye(DIM).reshape(LDIM).astype(complex)


def hamiltonian_at(params: ModelParams, t: float) -> np.ndarray:
    w = params.omega0 + params.omega1 * math.cos(2 * math.pi * params.fm * t)
    return _hamiltonian(w, params.v_perturb, params.hfc)


def _hamiltonian(w: float, v: float, a: float) -> np.ndarray:
    s = SPIN
    return w * s.sz + v * s.sx + a * (s.sx @ s.ix + s.sy @ s.iy + s.sz @ s.iz)


def commutator_superop(h: np.ndarray) -> np.ndarray:
    """Matrix of rho -> -i[h, rho] in the row-major vectorisation."""
    eye = np.eye(DIM)
    return -1j * (np.kron(h, eye) - np.kron(eye, h.T))


def coherent_superoperator(h: np.ndarray) -> SuperOperator:
    return SuperOperator(commutator_superop(np.asarray(h, dtype=complex)), "generator")


def dissipator(c: np.ndarray) -> np.ndarray:
    """Superoperator of D[c] rho = c rho c^+ - 1/2 {c^+ c, rho}."""
    eye = np.eye(DIM)
    cdc = c.conj().T @ c
    return np.kron(c, c.conj()) - 0.5 * np.kron(cdc, eye) - 0.5 * np.kron(eye, cdc.T)


def jump_operators(params: ModelParams) -> list[tuple[np.ndarray, float]]:
    """(operator, rate) pairs of the electron relaxation and pumping model.

    Longitudinal relaxation uses S+ and S- at R1/2 each, so the population
    difference relaxes at R1.  Pure dephasing uses Sz at 2*R2, which adds R2 to
    the decay of every electron coherence.  Pumping is S+ (alpha -> beta) at I.
    """
    sp = SPIN.s_plus
    return [
        (sp, params.r1 / 2),
        (sp.conj().T, params.r1 / 2),
        (SPIN.sz, 2 * params.r2),
        (sp, params.pump),
    ]


def relaxation_superoperator(params: ModelParams) -> SuperOperator:
    out = np.zeros((LDIM, LDIM), dtype=complex)
    for c, rate in jump_operators(params):
        if rate:
            out += rate * dissipator(c)
    return SuperOperator(out, "generator")


def liouvillian_at(params: ModelParams, t: float) -> SuperOperator:
    return coherent_superoperator(hamiltonian_at(params, t)) + relaxation_superoperator(params)


def liouvillian_parts(params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Split L(t) = static + omega1*cos(2*pi*fm*t) * modulated.

    Both returned arrays are plain 16x16 complex matrices; the propagator uses
    them to build all step generators of a period in one batch.
    """
    h0 = _hamiltonian(params.omega0, params.v_perturb, params.hfc)
    static = commutator_superop(h0) + relaxation_superoperator(params).elements
    return static, commutator_superop(SPIN.sz)
