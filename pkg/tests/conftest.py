import importlib

import numpy as np
import pytest

from ccistat import _kernels_py

ACCEPTANCE_LINES = []


def _backends():
    out = [pytest.param(_kernels_py, id="python")]
    try:
        out.append(pytest.param(importlib.import_module("ccistat._kernels"), id="cython"))
    except ImportError:
        out.append(pytest.param(None, id="cython", marks=pytest.mark.skip("extension not built")))
    return out


@pytest.fixture(params=_backends())
def kernel_module(request):
    """Each kernel implementation in turn."""
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def record_acceptance(number, name, passed, measured, tolerance):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {name} | measured={measured} | tolerance={tolerance}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
