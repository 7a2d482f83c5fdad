from __future__ import annotations

import numpy as np
import pytest

from tensorcomplex import catalog


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def box2():
    return catalog.box(2, 32)


@pytest.fixture(scope="session")
def box3():
    return catalog.box(3, 32)


@pytest.fixture(scope="session")
def annulus():
    return catalog.annulus(128)


@pytest.fixture(scope="session")
def shell():
    return catalog.spherical_shell(48)


@pytest.fixture(scope="session")
def torus():
    return catalog.solid_torus(48)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for number in sorted(lines):
            terminalreporter.write_line(lines[number])
