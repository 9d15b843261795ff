from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate

from roumieu.bumpcalc import Schedule, bump, make_unit, poly, sup_table
from roumieu.cli.oracles import bump_closed_form
from roumieu.rclass import make_rsequence
from roumieu.ultradiffop import (
    NotOfClassError,
    UltradiffOperator,
    UnsupportedCombinationError,
    apply_to_distribution,
    apply_to_function,
    certify_class,
    check_duality,
    check_nu_identity,
    exchange_check,
    make_operator,
    nu_bound_check,
    nu_correction,
    nu_pairings,
    nu_sup_table,
    truncation_budget,
)
from roumieu.ultradist import TOL_Q, delta, density, poly_density
from roumieu.weights import make_weight_sequence

W = make_weight_sequence("gevrey", 256, s=2.0)
PHI = (0.1, 1.0)
F = (0.2, 0.5)
PLATEAU = {"plateau": make_unit("plateau", 1, Schedule(1.0, 1.0, 0.0), name="plateau")}
SLOW_2D = make_unit("plateau", 2, Schedule(0.25, 1.0, 0.0), name="slow")


def D_op():
    return make_operator({(1,): 1.0}, W=W, name="D")


def one_plus_D2():
    return make_operator({(0,): 1.0, (2,): 1.0}, W=W, name="1+D2")


def test_finite_order_certified():
    P = one_plus_D2()
    assert P.certificate is not None and P.certificate.max_ratio <= 1.0 + 1e-12
    assert P.order == 2 and P.finite_order


def test_inverse_factorial_rule_certified():
    P = make_operator(coef_rule="inv_fact_weight", W=W, K_op=24)
    cert = P.certificate
    # |c_k| U_k M_k <= C re-verified independently
    LU = np.cumsum(np.log(cert.u.values))
    for k in range(cert.checked_orders + 1):
        c = math.exp(-math.lgamma(k + 1) - W.log_values[k])
        assert c * math.exp(LU[k] + W.log_values[k]) <= cert.C * (1 + 1e-12)


def test_coefficients_one_over_weight_rejected():
    rule = lambda k: math.exp(-W.log_values[sum(k)])
    coefs = {(n,): rule((n,)) for n in range(25)}
    P = UltradiffOperator(1, coefs, 24, rule, "inv_weight")
    with pytest.raises(NotOfClassError):
        certify_class(P, W)


def test_apply_to_function_convention():
    phi = bump(*PHI)
    xs = np.linspace(-0.8, 1.0, 19)
    got = apply_to_function(D_op(), phi)(xs[:, None])
    ref = np.array([-1j * bump_closed_form(*PHI)(x, 1) for x in xs])
    np.testing.assert_allclose(got, ref, atol=1e-12)
    adj = apply_to_function(D_op(), phi, adjoint=True)(xs[:, None])
    np.testing.assert_allclose(adj, -ref, atol=1e-12)


@pytest.mark.parametrize("T", [delta(0.3, order=1, coef=2.0), density(bump(*F)), poly_density(poly([1.0, 2.0]))])
def test_duality(T):
    for P in (D_op(), one_plus_D2()):
        assert check_duality(P, T, bump(*PHI))["holds"]


def test_infinite_order_on_polynomials_rejected():
    P = make_operator(coef_rule="inv_fact_weight", W=W, K_op=12)
    with pytest.raises(UnsupportedCombinationError):
        apply_to_distribution(P, poly_density(poly([1.0])))


def test_exchange_against_integration_by_parts():
    S, T, phi = delta(0.0), density(bump(*F)), bump(*PHI)
    out = exchange_check(D_op(), S, T, [phi], {"units": PLATEAU, "N_max": 10, "commutativity_modes": ()})
    assert out["passed"]
    row = out["per_phi"][0]
    f, ph = bump_closed_form(*F), bump_closed_form(*PHI)
    # <D f, phi> = -i int f' phi
    ref = -1j * integrate.quad(lambda y: f(y, 1) * ph(y, 0), F[0] - F[1], F[0] + F[1], epsabs=1e-13, epsrel=1e-12)[0]
    for re, im in row["legs"].values():
        assert abs(complex(re, im) - ref) <= 1e-9
    assert row["budget"] == 0.0


def test_truncation_budget_infinite_order():
    P = make_operator(coef_rule="inv_fact_weight", W=W, K_op=24)
    out = truncation_budget(P, delta(0.0), delta(0.0), bump(0.0, 2.0))
    assert math.isfinite(out["budget"]) and 0.0 < out["budget"] < 1e-2
    assert out["rho"] < 1.0
    assert truncation_budget(D_op(), delta(0.0), delta(0.0), bump(0.0, 2.0))["budget"] == 0.0


def test_nu_identity():
    for P in (D_op(), one_plus_D2()):
        for n in (1, 2, 4):
            rep = check_nu_identity(P, SLOW_2D.member(n), bump(*PHI))
            assert rep["holds"], rep


def test_nu_vanishes_once_unit_is_flat():
    # members equal to 1 on a box containing the strip carry no derivative there
    P = one_plus_D2()
    nu = nu_correction(P, make_unit("plateau", 2, Schedule(4.0, 1.0, 0.0)).member(3), bump(*PHI))
    pts = np.random.default_rng(0).uniform(-2, 2, size=(200, 2))
    assert np.max(np.abs(nu(pts))) == 0.0


def test_nu_sup_table_against_generic_table():
    P = one_plus_D2()
    pin, phi = SLOW_2D.member(3), bump(*PHI)
    fast = nu_sup_table(P, pin, phi, 2)
    generic = sup_table(nu_correction(P, pin, phi), 2)
    for key, v in fast.items():
        ref = generic[key][0]
        assert math.isclose(v, ref, rel_tol=1e-2, abs_tol=1e-12 * max(1.0, ref))


def test_nu_pairings():
    P = one_plus_D2()
    out = nu_pairings(P, SLOW_2D, bump(*PHI), density(bump(*F)), density(bump(-0.1, 0.7)), N_max=10)
    assert out["exactly_zero_from"] is not None and out["exactly_zero_from"] > 1
    # the cutoff changes nothing beyond the pairing quadrature tolerance
    scale = max(1.0, max(abs(complex(*v)) for v in out["values"]))
    assert out["theta_difference"] <= TOL_Q * scale
    assert out["covered_from"] is not None


def test_nu_bound_check_small():
    t = make_rsequence("linear", 1024)
    out = nu_bound_check(one_plus_D2(), SLOW_2D, bump(*PHI), t, K_max=8, N_max=10, ineq_order=8)
    assert out["passed"]
    assert out["auxiliary"]["r_pp_inequality"] and out["auxiliary"]["shifted_above_16H2"]
    assert all(v["holds"] for v in out["inequalities"].values())
