import math

import numpy as np
import pytest

from lac_spin_sim.errors import SteadyStateError
from lac_spin_sim.lockin import best_phase
from lac_spin_sim.spin import ModelParams
from lac_spin_sim.sweep import (
    Spectrum,
    field_window,
    peak_to_peak,
    refine_window,
    sweep_field,
    sweep_field_multi,
    sweep_modulation,
)

from .conftest import BOTH, base_params

GRID = np.linspace(-1.0, 1.0, 21)


def _spec(x, y=None):
    x = np.asarray(x, float)
    y = np.zeros_like(x) if y is None else np.asarray(y, float)
    return Spectrum("omega0", np.arange(len(x), dtype=float), x, y, "electron_alpha_population", base_params())


def test_no_modulation_no_signal():
    spec = sweep_field(base_params(omega1=0.0, fm=0.2), GRID)
    assert np.all(np.abs(spec.x) < 1e-14) and np.all(np.abs(spec.y) < 1e-14)


def test_peak_to_peak_examples():
    assert peak_to_peak(_spec([0.4, 0.4, 0.4]), 0.3) == 0.0
    assert peak_to_peak(_spec([-1.0, 3.0]), 0.0) == 4.0
    assert peak_to_peak(_spec([0.0, 0.0], [-1.0, 3.0]), math.pi / 2) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        peak_to_peak(_spec([1.0]), 0.0)


def test_spectrum_coordinates_increase():
    with pytest.raises(ValueError):
        Spectrum("omega0", np.array([0.0, 0.0]), np.zeros(2), np.zeros(2), "electron_alpha_population", base_params())


def test_empty_grid_rejected():
    with pytest.raises(ValueError):
        sweep_field(base_params(), [])
    with pytest.raises(ValueError):
        sweep_modulation(base_params(), [])


def test_steady_state_failure_names_coordinate():
    p = ModelParams(0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 16)
    with pytest.raises(SteadyStateError, match="omega0=0.5"):
        sweep_field(p, [0.5, 0.7])


def test_spectrum_metadata():
    spec = sweep_field(base_params(fm=0.2), GRID, "nuclear_polarization")
    assert spec.coordinate_kind == "omega0" and spec.observable == "nuclear_polarization"
    assert len(spec.points) == len(GRID)
    assert all(q.observable == "nuclear_polarization" for _, q in spec.points)
    assert spec.max_residual < 1e-10


def test_best_phase_beats_scanned_phases():
    p = base_params(fm=0.1, n_steps=128)
    spec = sweep_field(p, field_window(p, 81))
    phi = best_phase(spec)
    best = peak_to_peak(spec, phi)
    for deg in np.arange(0.0, 360.0, 1.0):
        assert best >= peak_to_peak(spec, math.radians(deg)) * (1 - 1e-12)


def test_point_independence_under_permutation():
    p = base_params(fm=0.3)
    forward = sweep_field_multi(p, GRID, BOTH)
    perm = np.random.default_rng(0).permutation(len(GRID))
    for i in perm[:6]:
        single = sweep_field_multi(p, [GRID[i]], BOTH)
        for obs in BOTH:
            assert single[obs].x[0] == forward[obs].x[i]
            assert single[obs].y[0] == forward[obs].y[i]


def test_thread_count_does_not_change_results():
    p = base_params(fm=0.3)
    serial = sweep_field_multi(p, GRID, BOTH, threads=1)
    threaded = sweep_field_multi(p, GRID, BOTH, threads=4)
    for obs in BOTH:
        assert np.array_equal(serial[obs].x, threaded[obs].x)
        assert np.array_equal(serial[obs].y, threaded[obs].y)


def test_field_window_shape():
    w = field_window(base_params())
    assert len(w) == 201
    assert w[0] == pytest.approx(-2.0) and w[-1] == pytest.approx(2.0)


def test_refine_window_density():
    base = base_params()
    coarse = field_window(base)
    fine = refine_window(coarse, 0.1, base)
    assert np.all(np.diff(fine) > 0)
    assert set(np.round(coarse, 12)) <= set(np.round(fine, 12))
    spacing = coarse[1] - coarse[0]
    inside = fine[(fine > 0.1 - 0.4 + 1e-9) & (fine < 0.1 + 0.4 - 1e-9)]
    assert np.allclose(np.diff(inside), spacing / 3)
    outside = fine[fine < 0.1 - 0.4 - 1e-9]
    assert np.allclose(np.diff(outside), spacing)


def test_refine_window_clipped_at_edge():
    base = base_params()
    coarse = field_window(base)
    fine = refine_window(coarse, coarse[-1], base)
    assert fine[-1] == pytest.approx(coarse[-1]) and fine[0] == coarse[0]


def test_sweep_modulation_fixed_n():
    base = base_params(n_steps=64)
    curve = sweep_modulation(base, [0.5, 1.0], BOTH, auto_n=False, window=np.linspace(-1, 1, 41))
    assert list(curve.converged_n) == [64, 64]
    for obs in BOTH:
        assert np.all(curve.intensity[obs] > 0)
        assert np.all((curve.phi_star[obs] >= 0) & (curve.phi_star[obs] < math.pi))
    spec = curve.spectra[1.0]["electron_alpha_population"]
    assert spec.phase_applied == curve.phi_star["electron_alpha_population"][1]


def test_intensity_non_increasing_with_fm(intensity_curve):
    values = intensity_curve.intensity["electron_alpha_population"]
    violations = [i for i in range(1, len(values)) if values[i] > values[i - 1]]
    assert len(violations) <= 1
    for i in violations:
        assert values[i] <= 1.05 * values[i - 1]
