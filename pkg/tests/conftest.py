import sys

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("ffcc", max_examples=40, deadline=None)
settings.load_profile("ffcc")


@pytest.fixture(scope="session")
def ffcc26():
    from ffcc.lattice import build_lattice
    return build_lattice("ffcc", 2, 6)


@pytest.fixture(scope="session")
def rhg22():
    from ffcc.lattice import build_raussendorf
    return build_raussendorf(2, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.REPORT, key=lambda s: int(s.split()[2].rstrip(":"))):
        terminalreporter.write_line(line)
