import math
import sys

import pytest

from msarkit.drift import SearchArea
from msarkit.sensor import CameraSpec, TargetModel


@pytest.fixture
def camera():
    # demonstration lens, not a datasheet value
    return CameraSpec(math.radians(25.0), math.radians(20.0), 640, 512, 50.0)


@pytest.fixture
def target():
    return TargetModel()


@pytest.fixture
def area1200():
    return SearchArea(0.0, 0.0, 1200.0, 1200.0)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
