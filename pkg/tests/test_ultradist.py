from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from roumieu.bumpcalc import Schedule, bump, make_unit, poly, translate
from roumieu.cli.oracles import bump_closed_form
from roumieu.ultradist import (
    DivergentPairingError,
    c3_check,
    convolvability_sequence,
    convolve,
    convolve_with_function,
    default_units,
    delta,
    density,
    diagnose,
    integrability_test,
    pair,
    poly_density,
)

Q = {"epsabs": 1e-13, "epsrel": 1e-12, "limit": 200}
PLATEAU = {"plateau": make_unit("plateau", 1, Schedule(1.0, 1.0, 0.0), name="plateau")}
PHI = (0.1, 1.0)
F = (0.2, 0.5)


def quad(fn, lo, hi):
    return integrate.quad(fn, lo, hi, **Q)[0]


@pytest.mark.parametrize("j", [0, 1, 2])
def test_point_pairing_convention(j):
    c = 0.5 - 2j
    val = pair(delta(0.2, order=j, coef=c), bump(*PHI))
    assert abs(val - c * 1j**j * bump_closed_form(*PHI)(0.2, j)) <= 1e-13


def test_density_and_poly_pairings():
    f, phi = bump_closed_form(*F), bump_closed_form(*PHI)
    ref = quad(lambda x: f(x, 0) * phi(x, 0), F[0] - F[1], F[0] + F[1])
    assert abs(pair(density(bump(*F)), bump(*PHI)) - ref) <= 1e-11
    ref = quad(lambda x: x * phi(x, 0), PHI[0] - PHI[1], PHI[0] + PHI[1])
    assert abs(pair(poly_density(poly([0.0, 1.0])), bump(*PHI)) - ref) <= 1e-11


def test_multiplier_leibniz_rule():
    psi, phi = bump(0.0, 2.0), bump(*PHI)
    T = delta(0.3, order=2, coef=1.5)
    lhs = pair(T.multiplied(psi), phi)
    x = np.array([[0.3]])
    # <T, psi phi> with the product derivative written out by hand
    d2 = psi.partial((2,))(x) * phi(x) + 2 * psi.partial((1,))(x) * phi.partial((1,))(x) + psi(x) * phi.partial((2,))(x)
    assert abs(lhs - 1.5 * (1j) ** 2 * d2[0]) <= 1e-12 * max(1.0, abs(lhs))


def test_reflection():
    T = delta(0.3, order=1) + density(bump(*F))
    phi = bump(*PHI)
    # phi(-x) is the bump with mirrored center
    assert abs(pair(T.reflected(), phi) - pair(T, bump(-PHI[0], PHI[1]))) <= 1e-11


def test_poly_against_unbounded_phi_diverges():
    with pytest.raises(DivergentPairingError):
        poly_density(poly([1.0])).multiplied(poly([0.0, 1.0]))


def _conv(S, T, phi):
    return convolve(S, T, [phi], {"units": PLATEAU, "N_max": 10, "commutativity_modes": ()})[0]


def test_delta_convolution_is_translation():
    a = 0.35
    res = _conv(delta(a), density(bump(*F)), bump(*PHI))
    f, phi = bump_closed_form(*F), bump_closed_form(*PHI)
    ref = quad(lambda y: f(y, 0) * phi(a + y, 0), F[0] - F[1], F[0] + F[1])
    assert res.convolvable
    assert abs(res.agreed_value - ref) <= 1e-9


def test_derivative_of_delta_convolution_by_parts():
    # <D delta_0 * f, phi> = i int f phi' = -i int f' phi
    res = _conv(delta(0.0, order=1), density(bump(*F)), bump(*PHI))
    f, phi = bump_closed_form(*F), bump_closed_form(*PHI)
    ref = -1j * quad(lambda y: f(y, 1) * phi(y, 0), F[0] - F[1], F[0] + F[1])
    assert abs(res.agreed_value - ref) <= 1e-9


def test_bump_bump_matches_nested_quadrature():
    g = (-0.1, 0.7)
    res = _conv(density(bump(*F)), density(bump(*g)), bump(*PHI))
    f, h, phi = bump_closed_form(*F), bump_closed_form(*g), bump_closed_form(*PHI)
    inner = lambda x: quad(lambda y: h(y, 0) * phi(x + y, 0), g[0] - g[1], g[0] + g[1])
    ref = quad(lambda x: f(x, 0) * inner(x), F[0] - F[1], F[0] + F[1])
    assert abs(res.agreed_value - ref) <= 1e-9
    assert res.cross_mode_spread <= 1e-9


def test_delta_with_constant_is_integral_of_phi():
    res = _conv(delta(0.0), poly_density(poly([1.0])), bump(*PHI))
    ref = quad(lambda x: bump_closed_form(*PHI)(x, 0), PHI[0] - PHI[1], PHI[0] + PHI[1])
    assert abs(res.agreed_value - ref) <= 1e-9


@pytest.mark.parametrize("mode", ["eps", "pi", "pi1", "pi2"])
def test_reuse_of_covered_entries_is_exact(mode):
    S, T, phi = density(bump(*F)), delta(0.3, order=1), bump(*PHI)
    unit = default_units()["dilation"]
    on = convolvability_sequence(S, T, phi, unit, mode, N_max=8)
    off = convolvability_sequence(S, T, phi, unit, mode, N_max=8, reuse_covered=False)
    gaps = np.abs(np.array(on.values) - np.array(off.values))
    assert np.max(gaps) <= 1e-10


@pytest.mark.parametrize("mode", ["eps", "pi", "pi1", "pi2"])
def test_constants_are_not_convolvable(mode):
    one = poly_density(poly([1.0]))
    dg = convolvability_sequence(one, one, bump(*PHI), PLATEAU["plateau"], mode, N_max=10)
    assert not dg.converged and dg.divergence_kind == "unbounded"


def test_integrability():
    units = [PLATEAU["plateau"], default_units()["dilation"]]
    f = bump_closed_form(*F)
    out = integrability_test(density(bump(*F)), units, N_max=10)
    assert out["verdict"] == "integrable_evidence"
    assert abs(complex(*out["limit"]) - quad(lambda x: f(x, 0), F[0] - F[1], F[0] + F[1])) <= 1e-9
    assert integrability_test(poly_density(poly([1.0])), units, N_max=10)["verdict"] == "not_integrable"
    with pytest.raises(ValueError):
        integrability_test(delta(0.0), units[:1])


def test_c3_diagnostic():
    phi = bump(*PHI)
    assert c3_check(delta(0.0), density(bump(*F)), phi, phi)["converged"]
    one = poly_density(poly([1.0]))
    out = c3_check(one, one, phi, phi)
    assert not out["converged"] and out["divergence_kind"] == "unbounded"


def test_convolve_with_function_point_terms():
    phi = bump(*PHI)
    xs = np.linspace(-1.5, 1.5, 31)
    got = convolve_with_function(delta(0.2, order=1), phi, xs)
    ref = np.array([-1j * bump_closed_form(*PHI)(x - 0.2, 1) for x in xs])
    np.testing.assert_allclose(got, ref, atol=1e-13)


def test_diagnose_classification():
    assert diagnose([1.0 + 1e-12 * n for n in range(10)]).converged
    assert diagnose([float(n * n) for n in range(10)]).divergence_kind == "unbounded"
    assert diagnose([(-1.0) ** n for n in range(10)]).divergence_kind == "oscillating"


@settings(max_examples=15)
@given(st.floats(-1.0, 1.0))
def test_support_shift_property(a):
    # <delta_a * T, phi> = <T, phi(. + a)>
    T, phi = density(bump(*F)), bump(*PHI)
    res = _conv(delta(a), T, phi)
    assert abs(res.agreed_value - pair(T, translate(phi, a))) <= 1e-9
