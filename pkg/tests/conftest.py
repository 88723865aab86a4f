import numpy as np
import pytest

from poissonpoly.measure import ConvexBody, MeasureModel


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def disk():
    return MeasureModel.uniform(ConvexBody.disk())


@pytest.fixture(scope="session")
def square():
    return MeasureModel.uniform(ConvexBody.square())


@pytest.fixture(scope="session")
def interval():
    return MeasureModel.uniform(ConvexBody.interval())


@pytest.fixture(scope="session")
def ball():
    return MeasureModel.uniform(ConvexBody.ball3d())


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
