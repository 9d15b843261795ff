from __future__ import annotations

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from roumieu.bumpcalc import (
    Schedule,
    SeminormParams,
    TruncationOrderError,
    bump,
    diag_compose,
    dilate,
    make_unit,
    plateau,
    product,
    reflect,
    seminorm,
    step,
    sup_table,
    translate,
    verify_unit,
)
from roumieu.cli.oracles import bump_closed_form
from roumieu.rclass import make_rsequence
from roumieu.weights import make_weight_sequence

mp.mp.dps = 40


def mp_bump(c, r):
    def f(x):
        u = (x - c) / r
        w = 1 - u * u
        return mp.exp(-1 / w) if w > 0 else mp.mpf(0)

    return f


@pytest.mark.parametrize("k", [0, 1, 2, 3, 5, 8])
def test_bump_derivatives_against_mpmath(k):
    c, r = 0.1, 0.8
    f = bump(c, r).partial((k,))
    xs = np.linspace(c - 0.9 * r, c + 0.9 * r, 11)
    exact = np.array([float(mp.diff(mp_bump(mp.mpf(c), mp.mpf(r)), mp.mpf(x), k)) for x in xs])
    got = f(xs[:, None])
    scale = max(1.0, float(np.max(np.abs(exact))))
    assert np.max(np.abs(got - exact)) <= 1e-10 * scale


@given(st.floats(-1, 1), st.floats(0.2, 2.0), st.floats(-0.95, 0.95), st.integers(0, 2))
def test_bump_against_closed_form(c, r, t, j):
    x = c + t * r
    ref = bump_closed_form(c, r)(x, j)
    got = complex(bump(c, r).partial((j,))(np.array([[x]]))[0])
    assert abs(got - ref) <= 1e-11 * max(1.0, abs(ref)) / r**j


def test_support_and_bbox():
    f = bump(0.5, 0.25)
    np.testing.assert_allclose(f.bbox(), [[0.25, 0.75]])
    assert f(np.array([[0.2], [0.8]])).tolist() == [0.0, 0.0]


def test_exact_product_same_geometry():
    f = product(bump(0.0, 1.0), bump(0.0, 1.0))
    xs = np.linspace(-0.9, 0.9, 21)
    np.testing.assert_allclose(f(xs[:, None]), np.exp(-2.0 / (1 - xs**2)), rtol=1e-13)


def test_product_different_geometry_pointwise():
    a, b = bump(0.0, 1.0), bump(0.4, 0.5)
    f = product(a, b)
    xs = np.linspace(-1, 1, 41)[:, None]
    np.testing.assert_allclose(f(xs), a(xs) * b(xs), rtol=1e-13, atol=1e-300)
    fp = f.partial((1,))
    ref = a.partial((1,))(xs) * b(xs) + a(xs) * b.partial((1,))(xs)
    np.testing.assert_allclose(fp(xs), ref, rtol=1e-12, atol=1e-14)


def test_affine_maps_pointwise():
    f = bump(0.2, 0.6, 1.5)
    xs = np.linspace(-2, 2, 81)[:, None]
    np.testing.assert_allclose(dilate(f, 2.0)(xs), f(xs / 2.0), rtol=1e-12)
    np.testing.assert_allclose(translate(f, 0.3)(xs), f(xs + 0.3), rtol=1e-12)
    np.testing.assert_allclose(reflect(f)(xs), f(-xs), rtol=1e-12)
    # chain rule through the dilation
    np.testing.assert_allclose(dilate(f, 2.0).partial((1,))(xs), 0.5 * f.partial((1,))(xs / 2.0), rtol=1e-13, atol=1e-15)


def test_tensor_bump_factorises():
    f = bump([0.1, -0.2], [0.7, 0.5])
    pts = np.random.default_rng(0).uniform(-0.8, 0.8, size=(200, 2))
    ref = bump(0.1, 0.7)(pts[:, :1]) * bump(-0.2, 0.5)(pts[:, 1:])
    np.testing.assert_allclose(f(pts), ref, rtol=1e-14, atol=1e-300)
    d = f.partial((1, 2))(pts)
    ref = bump(0.1, 0.7).partial((1,))(pts[:, :1]) * bump(-0.2, 0.5).partial((2,))(pts[:, 1:])
    np.testing.assert_allclose(d, ref, rtol=1e-12, atol=1e-14)


def test_diag_compose():
    g = bump(0.1, 0.9)
    F = diag_compose(g)
    pts = np.random.default_rng(1).uniform(-0.5, 0.5, size=(100, 2))
    np.testing.assert_allclose(F(pts), g(pts.sum(axis=1)[:, None]), rtol=1e-14, atol=1e-300)
    np.testing.assert_allclose(F.partial((1, 1))(pts), g.partial((2,))(pts.sum(axis=1)[:, None]), rtol=1e-12, atol=1e-14)


def test_step_against_quadrature_oracle():
    beta = lambda s: mp.exp(-1 / (4 * s * (1 - s))) if 0 < s < 1 else mp.mpf(0)
    Z = mp.quad(beta, [0, 1])
    for t in (0.1, 0.3, 0.5, 0.77, 0.95):
        ref = float(mp.quad(beta, [0, t]) / Z)
        assert abs(float(step(np.array([t]))[0]) - ref) <= 1e-12
    ts = np.linspace(-0.5, 1.5, 401)
    s = step(ts)
    assert np.all(np.diff(s) >= -1e-15)
    np.testing.assert_allclose(s + step(1 - ts), 1.0, atol=1e-14)


def test_plateau_shape():
    f = plateau([[-0.2, 0.3]], 0.4)
    inner = np.linspace(-0.2, 0.3, 17)[:, None]
    outer = np.array([[-0.61], [0.71], [2.0]])
    np.testing.assert_allclose(f(inner), 1.0, atol=1e-15)
    assert np.all(f(outer) == 0.0)
    assert np.all(f.partial((1,))(inner) == 0.0)


def test_seminorm_matches_direct_sup():
    f = bump(0.0, 1.0)
    r = make_rsequence("linear", 12)
    W = make_weight_sequence("gevrey", 16, s=2.0)
    res = seminorm(f, SeminormParams("r", r=r, K_max=8, W=W))
    # direct: max over k of sup |f^(k)| / (k! * k!^2) on a fine grid
    xs = np.linspace(-1, 1, 20001)[:, None]
    direct = max(float(np.max(np.abs(f.partial((k,))(xs))) / math.factorial(k) ** 3) for k in range(9))
    assert direct <= res.value * (1 + 1e-12)
    assert res.value <= direct * (1 + 1e-6)
    assert res.stabilized


def test_sup_table_shortcuts_agree_with_grid():
    f = dilate(bump(0.0, 1.0), 2.0)
    table = sup_table(f, 8)
    xs = np.linspace(-2, 2, 40001)[:, None]
    for k in range(9):
        grid = float(np.max(np.abs(f.partial((k,))(xs))))
        assert grid <= table[(k,)][0] * (1 + 1e-10)
        # the reported argmax re-evaluates to the reported sup
        val, x = table[(k,)]
        assert math.isclose(float(np.abs(f.partial((k,))(np.array([x]))[0])), val, rel_tol=1e-12)


def test_seminorm_parameter_validation():
    r = make_rsequence("linear", 70)
    with pytest.raises(ValueError):
        SeminormParams("r", K_max=8)
    with pytest.raises(ValueError):
        SeminormParams("r", r=r, h=1.0, K_max=8)
    with pytest.raises(TruncationOrderError):
        SeminormParams("r", r=r, K_max=65)


def test_units():
    r_list = [make_rsequence("linear", 256)]
    U = make_unit("plateau", 1, Schedule(1.0, 1.0, 0.0))
    rep = verify_unit(U, r_list, K_max=8, N_max=12)
    assert rep.passed, rep.counterexample
    assert U.first_covering(np.array([[-2.5, 2.5]]), 12) == 3
    shrink = make_unit("dilation", 1, Schedule(1.0, -1.0, 0.0))
    bad = verify_unit(shrink, r_list, K_max=8, N_max=12)
    assert not bad.passed and bad.counterexample
    with pytest.raises(ValueError):
        make_unit("dilation", 1, profile=bump(0.0, 1.0))
