from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from roumieu.quadrature import QuadratureError, integrate_box


def test_polynomial_exact():
    val, err = integrate_box(lambda x: x[:, 0] ** 5 - 3 * x[:, 0] ** 2, [[-1.0, 2.0]])
    assert abs(val - (64 / 6 - 1 / 6 - 9)) <= 1e-13
    assert err <= 1e-10


def test_two_dimensional_against_scipy():
    f = lambda x: np.exp(-x[:, 0] ** 2 - 0.5 * x[:, 1] ** 2) * np.cos(x[:, 0] * x[:, 1])
    val, _ = integrate_box(f, [[-1.0, 1.5], [-0.5, 2.0]])
    ref, _ = integrate.dblquad(lambda y, x: math.exp(-x * x - 0.5 * y * y) * math.cos(x * y), -1.0, 1.5, -0.5, 2.0, epsabs=1e-13, epsrel=1e-13)
    assert abs(val - ref) <= 1e-10


def test_breaks_handle_kinks():
    f = lambda x: np.abs(x[:, 0] - 0.3)
    val, _ = integrate_box(f, [[0.0, 1.0]], breaks=[[0.3]])
    assert abs(val - (0.3**2 / 2 + 0.7**2 / 2)) <= 1e-14


def test_complex_integrand():
    val, _ = integrate_box(lambda x: np.exp(1j * x[:, 0]), [[0.0, math.pi]])
    assert abs(val - 2j) <= 1e-12


def test_mass_relative_tolerance_on_cancellation():
    # large oscillating integrand with zero net value; the integral of |f| is 4e8
    f = lambda x: 1e8 * np.sin(40 * x[:, 0])
    val, err = integrate_box(f, [[0.0, 2 * math.pi]], rel_tol=1e-12, relative_to="mass")
    assert abs(val) <= 1e-12 * 4e8
    assert err <= 1e-12 * 4e8
    with pytest.raises(ValueError):
        integrate_box(f, [[0.0, 1.0]], relative_to="other")


def test_budget_exceeded_raises():
    with pytest.raises(QuadratureError):
        integrate_box(lambda x: np.sign(x[:, 0] - 1 / 3), [[0.0, 1.0]], tol=1e-15, rel_tol=0.0, max_points=2000)


def test_invalid_box():
    with pytest.raises(ValueError):
        integrate_box(lambda x: x[:, 0], [[1.0, 0.0]])
    with pytest.raises(ValueError):
        integrate_box(lambda x: x[:, 0], [[0.0, np.inf]])


@given(st.floats(-3, 3), st.floats(0.1, 4.0), st.floats(0.1, 5.0))
def test_gaussian_property(a, w, s):
    val, _ = integrate_box(lambda x: np.exp(-s * (x[:, 0] - a) ** 2), [[a - w, a + w]])
    ref = math.sqrt(math.pi / s) * math.erf(math.sqrt(s) * w)
    assert abs(val - ref) <= 1e-10
