import pytest

from shapejc import _backend
from shapejc.operator_core import CouplingConfig, ShapeInvariantModel, energy_ladder

BACKENDS = ["python"] + (["cython"] if _backend.BACKEND == "cython" else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture
def ho16():
    return energy_ladder(ShapeInvariantModel.harmonic(1.0), 16)


@pytest.fixture
def scaling16():
    return energy_ladder(ShapeInvariantModel.scaling(0.5, 1.0), 16)


@pytest.fixture(params=["linear", "intensity"])
def mode(request):
    return request.param


@pytest.fixture
def detuned():
    return CouplingConfig(0.2, 0.3)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
