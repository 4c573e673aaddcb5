import math
import os
import subprocess
import sys

import mpmath
import numpy as np
import pytest

from ccistat import BACKEND
from ccistat.cci.special import bessel_k0, k0_cell_average, k0_density, k0_integral
from ccistat.errors import InvalidArgumentError

mpmath.mp.dps = 30


def mp_k0(x):
    return float(mpmath.besselk(0, x))


LOG_GRID = np.geomspace(1e-6, 700.0, 10_000)
ORACLE = np.array([mp_k0(x) for x in LOG_GRID])


def test_k0_relative_error_on_log_grid(kernel_module):
    err = np.max(np.abs(kernel_module.k0(LOG_GRID) / ORACLE - 1.0))
    assert err <= 1e-10
    assert err <= 1e-13


@pytest.mark.parametrize("x, expected", [(1.0, 0.42102443824), (2.0, 0.11389387275)])
def test_k0_table_values(x, expected):
    assert bessel_k0(x) == pytest.approx(expected, abs=1e-11)


def test_k0_log_divergence():
    assert bessel_k0(1e-8) > 17
    x = 1e-12
    assert bessel_k0(x) == pytest.approx(-math.log(x / 2) - 0.5772156649015329, rel=1e-12)


def test_k0_underflows_instead_of_failing():
    assert bessel_k0(800.0) == 0.0
    assert bessel_k0(np.array([1000.0, 5.0]))[0] == 0.0


@pytest.mark.parametrize("bad", [0.0, -1.0, np.nan])
def test_k0_domain(bad):
    with pytest.raises(InvalidArgumentError):
        bessel_k0(bad)


def test_k0_scalar_and_array_shapes():
    assert isinstance(bessel_k0(1.0), float)
    assert bessel_k0(np.ones((2, 3))).shape == (2, 3)


@pytest.mark.parametrize("b", [1e-8, 1e-3, 0.5, 1.999, 2.0, 2.001, 5.0, 30.0, 200.0])
def test_k0_integral_against_quadrature(kernel_module, b):
    exact = float(mpmath.quad(lambda t: mpmath.besselk(0, t), [0, min(b, 1), b]))
    assert kernel_module.k0_integral(np.array([b]))[0] == pytest.approx(exact, rel=1e-12, abs=1e-300)


def test_k0_integral_limit():
    assert k0_integral(1e3) == pytest.approx(math.pi / 2, rel=1e-15)
    with pytest.raises(InvalidArgumentError):
        k0_integral(-1.0)


def test_k0_density_and_cell_average():
    assert k0_density(1.0, 1.0) == pytest.approx(0.42102443824 / math.pi, rel=1e-10)
    assert np.isinf(k0_density(0.0, 2.0))
    h = 0.01
    exact = float(mpmath.quad(lambda t: mpmath.besselk(0, t), [0, h])) / (math.pi * h)
    assert k0_cell_average(h, 1.0) == pytest.approx(exact, rel=1e-12)


def test_cosine_sum_matches_direct_sum(kernel_module, rng):
    coef = rng.standard_normal(3000)
    h = 0.013
    x = np.linspace(0, 40, 301)
    direct = np.cos(np.outer(x, h * np.arange(coef.size))) @ coef
    got = kernel_module.cosine_sum(coef, h, x)
    assert np.max(np.abs(got - direct)) <= 1e-10 * np.sum(np.abs(coef))


def test_backends_agree(rng):
    from ccistat import _kernels_py
    pytest.importorskip("ccistat._kernels")
    from ccistat import _kernels

    x = 10.0 ** rng.uniform(-6, 2.8, 5000)
    assert np.allclose(_kernels.k0(x), _kernels_py.k0(x), rtol=1e-14, atol=0)
    assert np.allclose(_kernels.k0_integral(x), _kernels_py.k0_integral(x), rtol=1e-14, atol=0)


def test_environment_forces_python_backend():
    env = dict(os.environ, CCISTAT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import ccistat; print(ccistat.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
    assert BACKEND in ("cython", "python")
