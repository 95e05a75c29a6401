import pytest

from radscat.fields import WeightSpec, make_initial_data, make_nonlinearity, make_potential
from radscat.scattering import ScatterPlan, scatter
from radscat.scenario import RawScenario, validate_scenario

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def canonical():
    return validate_scenario(RawScenario(5, 1.9, 2.3, 2.5, 1e-3, 1e-3))


@pytest.fixture(scope="session")
def canonical_inputs(canonical):
    s = canonical
    d = make_initial_data("power", s.eps, s.k_reduced)
    V = make_potential(s.V0, s.kappa)
    F = make_nonlinearity(1.0, s.p)
    return d, V, F, WeightSpec.from_scenario(s)


@pytest.fixture(scope="session")
def canonical_run(canonical, canonical_inputs):
    d, V, F, _ = canonical_inputs
    return scatter(canonical, d, V, F, plan=ScatterPlan(dr=1 / 8))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
