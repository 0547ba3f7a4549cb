import numpy as np
import pytest

from logeit import ConductivityField, boundary_trig_basis, build_disk_mesh

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def mesh4():
    return build_disk_mesh(4)


@pytest.fixture(scope="session")
def basis8(mesh4):
    return boundary_trig_basis(mesh4, 8)


@pytest.fixture(scope="session")
def sigma_bump(mesh4):
    return ConductivityField.from_function(mesh4, lambda x, y: 1 + 0.6 * np.exp(-6 * ((x - 0.3) ** 2 + y**2)))


@pytest.fixture(scope="session")
def eta_smooth(mesh4):
    return ConductivityField.from_function(mesh4, lambda x, y: np.cos(2 * x) * (1 + y) - 0.3)


@pytest.fixture(scope="session")
def xi_smooth(mesh4):
    return ConductivityField.from_function(mesh4, lambda x, y: x * y + 0.5)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
