import pytest

from vspm.hydrodynamics import FluidEnvironment, PaddleGeometry
from vspm.kinematics import ChainGeometry
from vspm.vehicle import SimulationConfig

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and not report.passed):
        detail = "; ".join(str(v) for k, v in report.user_properties if k == "detail")
        _CRITERIA[number] = (title, report.passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, passed, detail = _CRITERIA[number]
        line = f"{'PASS' if passed else 'FAIL'}  criterion {number:>2}: {title}"
        terminalreporter.write_line(f"{line} [{detail}]" if detail else line)


@pytest.fixture
def geom():
    return ChainGeometry()


@pytest.fixture
def paddle():
    return PaddleGeometry()


@pytest.fixture
def env():
    return FluidEnvironment()


@pytest.fixture
def sim_config():
    return SimulationConfig()
