import numpy as np
import pytest

from bvarkit.series import SeriesPanel

# Lag-1 coefficient estimates as published for the seven-variable annual
# model. Row i holds equation i; column j the coefficient on variable j.
ANNUAL_NAMES = ("accidents", "population", "gdp", "private_vehicles", "buses",
                "subway_rail", "road_speed")
ANNUAL_A = np.array([
    [0.66, -0.14, 0.03, 0.06, -0.28, 0.09, 0.76],
    [0.08, 0.71, -0.13, 0.63, -0.46, 0.35, 0.11],
    [0.11, -0.12, 0.67, 0.28, 0.79, 0.36, 0.45],
    [-0.06, 0.50, -0.04, 0.26, 0.28, 0.19, 0.22],
    [0.15, 0.14, 0.21, 0.34, -0.02, 0.10, -0.04],
    [-0.27, -0.30, 0.37, -0.48, 0.15, 0.17, 0.53],
    [0.15, 0.06, -0.04, 0.03, -0.02, 0.05, 0.19],
])
ANNUAL_C = np.array([-0.03, 0.08, 0.04, 0.02, 0.34, -0.11, -0.12])


def make_panel(values, names=None):
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    T, N = values.shape
    if names is None:
        names = tuple(f"y{i + 1}" for i in range(N))
    return SeriesPanel(names, tuple(str(t) for t in range(T)), values)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def annual_estimate():
    from bvarkit.ols import VarEstimate
    return VarEstimate.from_coefficients(ANNUAL_A, ANNUAL_C, names=ANNUAL_NAMES,
                                         source="bvar_posterior_mean")


_ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(label, passed, detail)``."""
    def record(label, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'}  {label}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
