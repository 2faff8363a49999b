import math
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")

SQRT3 = math.sqrt(3.0)


def random_polyline(rng, n, scale=10.0):
    return rng.uniform(-scale, scale, size=(n, 2))


@pytest.fixture
def rng():
    return np.random.default_rng(20131)


@pytest.fixture
def wedge():
    return [(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]


@pytest.fixture
def koch21():
    return [1 / 3] + [1 / 9] * 4 + [1 / 27] * 16


def pytest_terminal_summary(terminalreporter):
    from oracles import ACCEPTANCE

    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k[2:])):
        terminalreporter.write_line(ACCEPTANCE[key])
