import numpy as np
import pytest

from sjolab import GridSpec, make_rng
from sjolab.grid import random_bandlimited

# acceptance results, printed once at the end of the run
ACCEPTANCE: dict = {}


def record(num: int, name: str, ok: bool, detail: str):
    ACCEPTANCE[num] = (name, bool(ok), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        name, ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d} {'PASS' if ok else 'FAIL'}  {name}: {detail}")


@pytest.fixture
def rng():
    return make_rng(12345)


@pytest.fixture
def spec1():
    return GridSpec((32.0,), (256,))


@pytest.fixture
def small1():
    return GridSpec((16.0,), (64,))


@pytest.fixture
def rand1(spec1, rng):
    return random_bandlimited(spec1, rng, band=32)


def rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.abs(a - b).max() / np.abs(b).max())
