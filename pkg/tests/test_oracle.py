import math

import numpy as np
import pytest

from lac_spin_sim.errors import IntegratorError
from lac_spin_sim.expm import matrix_exp
from lac_spin_sim.oracle import (
    burn_in_periods,
    compare,
    exhaustive_phase_scan,
    rk4_integrate,
    scaled_taylor_expm,
    taylor_expm,
    two_state_rate_model,
)
from lac_spin_sim.spin import DensityMatrix, ModelParams

from .conftest import base_params, random_rho


def test_taylor_zero():
    val, bound = taylor_expm(np.zeros((5, 5)), 10)
    assert np.array_equal(val, np.eye(5))
    assert bound == 0


def test_taylor_scalar():
    val, _ = taylor_expm(np.array([[0.5]]), 20)
    assert abs(val[0, 0] - math.exp(0.5)) < 1e-14


@pytest.mark.parametrize("seed", range(5))
def test_taylor_within_remainder_of_matrix_exp(seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    m /= np.linalg.norm(m, 2)
    val, bound = taylor_expm(m, 30)
    # floating-point rounding dominates the 30-term remainder
    assert np.abs(val - matrix_exp(m)).max() <= bound + 1e-13


def test_scaled_taylor_large_norm():
    m = np.diag([-8.0, 3.0, 0.5j])
    val, _ = scaled_taylor_expm(m)
    assert np.allclose(val, np.diag(np.exp(np.diag(m))), rtol=1e-13)


def test_two_state_limits():
    assert two_state_rate_model(0.3, 0.0, 1e4, 0.9) == pytest.approx(0.5)
    assert two_state_rate_model(0.0, 0.02, 7.0, 0.5) == pytest.approx(0.5 * math.exp(-0.14))
    assert two_state_rate_model(0.1, 0.01, 1e5, 0.5) == pytest.approx(0.05 / 0.11)
    assert 0.05 / 0.11 == pytest.approx(0.454545454545, abs=1e-12)


def test_two_state_against_rk4():
    r1, pump = 0.1, 0.01

    def f(p):
        return -(pump + r1 / 2) * p + (r1 / 2) * (1 - p)

    p, h = 0.5, 0.05
    for _ in range(4000):  # t = 200
        k1 = f(p)
        k2 = f(p + h / 2 * k1)
        k3 = f(p + h / 2 * k2)
        k4 = f(p + h * k3)
        p += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    assert p == pytest.approx(two_state_rate_model(r1, pump, 200.0, 0.5), abs=1e-12)


def test_rk4_zero_generator():
    p = ModelParams(0, 0, 0, 0, 1.0, 0, 0, 0, 4)
    rho = DensityMatrix(random_rho(np.random.default_rng(0)))
    out = rk4_integrate(p, rho, 3, 40)
    assert np.allclose(out.elements, rho.elements, atol=1e-15)


def test_rk4_relaxation_closed_form():
    r1, pump = 0.2, 0.05
    p = ModelParams(0, 0, 0, 0, 0.5, r1, 0.1, pump, 8)
    rho0 = DensityMatrix(np.diag([0.4, 0.3, 0.2, 0.1]).astype(complex))
    out = rk4_integrate(p, rho0, 5, 400).elements
    t = 5 * p.period
    p_alpha = out[0, 0].real + out[1, 1].real
    assert abs(p_alpha - two_state_rate_model(r1, pump, t, 0.7)) < 1e-8


def test_rk4_substeps_precondition():
    with pytest.raises(ValueError):
        rk4_integrate(base_params(n_steps=16), DensityMatrix.maximally_mixed(), 1, 100)


def test_rk4_trace_drift_detected():
    # a step far beyond RK4 stability blows up the trace
    p = ModelParams(0, 0, 0, 0, 1e-3, 50.0, 50.0, 0.0, 2)
    with pytest.raises(IntegratorError):
        rk4_integrate(p, DensityMatrix(np.diag([1, 0, 0, 0]).astype(complex)), 5, 20)


def test_burn_in_rule():
    assert burn_in_periods(base_params(fm=1.0)) == 2000
    assert burn_in_periods(base_params(fm=0.01)) == 200


def test_burn_in_covers_slow_modes():
    p = base_params(fm=1.0, n_steps=16)
    m = np.diag([1.0, 0.999] + [0.5] * 14)
    assert burn_in_periods(p, m) == math.ceil(20 / -math.log(0.999))
    with pytest.raises(IntegratorError):
        burn_in_periods(p, np.eye(16))


def test_phase_scan():
    x = np.array([0.0, 1.0, -1.0])
    phi, ptp = exhaustive_phase_scan(x, np.zeros(3))
    assert phi == 0 and ptp == 2


def test_compare_report():
    rep = compare("q", [1.0, 2.0], [1.0, 2.5], 0.1)
    assert not rep.passed and rep.max_abs_error == 0.5
    assert "FAIL" in rep.line()
