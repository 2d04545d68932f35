import numpy as np
import pytest

from convexcore.gallery import build
from convexcore.groups import word_ball


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def torus():
    return build("diagonal_torus", n=3, t=2.0)


@pytest.fixture(scope="session")
def schottky():
    return build("schottky_so21", s=3.0, theta=float(np.pi / 4))


@pytest.fixture(scope="session")
def torus_ball8(torus):
    return word_ball(torus.group, 8)


@pytest.fixture(scope="session")
def schottky_ball8(schottky):
    return word_ball(schottky.group, 8)


ACCEPTANCE: dict[int, tuple[str, str]] = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    number, title = marker.args
    ACCEPTANCE[number] = ("PASS" if call.excinfo is None else "FAIL", title)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion check")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        status, title = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {title}")
