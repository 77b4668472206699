import pytest

from qkramers import BathSpec, CubicPotential


@pytest.fixture
def potential():
    return CubicPotential.from_energy(0.5, 10.0)


@pytest.fixture
def bath():
    return BathSpec(1.3, 0.3, 10.0)


def pytest_terminal_summary(terminalreporter):
    from tests import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for r in test_acceptance.RESULTS:
            terminalreporter.write_line(r.line())
