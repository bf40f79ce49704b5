import functools

import numpy as np
import pytest

from bogovskii.config import Experiment, load_shipped
from bogovskii.geometry import Ball, Box, DomainPair, normalize
from bogovskii.kernel import Bump
from bogovskii.paths import build_path_system
from bogovskii.whitney import decompose

# criterion number -> (passed, detail); filled by test_acceptance, printed at the end
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def experiments():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = Experiment(load_shipped(name))
        return cache[name]

    return get


@pytest.fixture(scope="session")
def ball(experiments):
    return experiments("ball-dipole")


@pytest.fixture(scope="session")
def square(experiments):
    return experiments("square-dipole")


@functools.lru_cache(maxsize=None)
def unit_ball_path_system():
    """Unit disk with base point 0, normalized, on a coarse complex."""
    pair = normalize(DomainPair(Ball((0.0, 0.0), 1.0), Ball((0.0, 0.0), 1.0), (0.0, 0.0)))
    cx = decompose(pair, 15 * 2.0**-5)
    return build_path_system(cx, pair)


@pytest.fixture(scope="session")
def unit_ball_system():
    return unit_ball_path_system()


@pytest.fixture(scope="session")
def square_system():
    box = Box((0.0, 0.0), (1.0, 1.0))
    pair = normalize(DomainPair(box, box, (0.5, 0.5)))
    cx = decompose(pair, 30 * 2.0**-6)
    return build_path_system(cx, pair)


@pytest.fixture(scope="session")
def bump2():
    return Bump((0.0, 0.0), 2)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
