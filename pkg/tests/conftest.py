import numpy as np
import pytest
from hypothesis import settings

from lac_spin_sim.spin import ModelParams
from lac_spin_sim.sweep import sweep_modulation

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")

# base parameter set (arbitrary frequency units)
BASE_VALUES = dict(v_perturb=0.1, hfc=0.2, omega1=0.1, r1=0.1, r2=0.1, pump=0.01)
FM_GRID = (0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0)
LOWEST_FM = 0.001
BOTH = ["electron_alpha_population", "nuclear_polarization"]

ACCEPTANCE_LINES: dict[str, str] = {}
ORACLE_LINES: list[str] = []


def base_params(**overrides) -> ModelParams:
    values = dict(omega0=0.0, fm=1.0, n_steps=64, **BASE_VALUES)
    values.update(overrides)
    return ModelParams(**values)


def random_rho(rng, dim=4):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def random_hermitian(rng, dim=4):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2


@pytest.fixture(scope="session")
def intensity_curve():
    return sweep_modulation(base_params(), FM_GRID, BOTH)


@pytest.fixture(scope="session")
def intensity_curve_small_v():
    return sweep_modulation(base_params(v_perturb=1e-4), FM_GRID, BOTH)


@pytest.fixture(scope="session")
def lowest_fm_curve():
    return sweep_modulation(base_params(), [LOWEST_FM], BOTH)


@pytest.fixture
def record():
    def _record(criterion: str, passed: bool, detail: str):
        ACCEPTANCE_LINES[criterion] = f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}"

    return _record


@pytest.fixture
def report_oracle():
    def _report(rep):
        ORACLE_LINES.append(rep.line())
        return rep

    return _report


def pytest_terminal_summary(terminalreporter):
    if ORACLE_LINES:
        terminalreporter.section("oracle reports")
        for line in ORACLE_LINES:
            terminalreporter.write_line(line)
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES, key=lambda k: int(k.split()[0].rstrip("."))):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
