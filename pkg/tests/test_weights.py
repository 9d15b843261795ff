from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from roumieu.weights import (
    CONDITIONS,
    associated_function,
    check_condition,
    check_product_inequality,
    make_weight_sequence,
    multiindex_weight,
    weight_from_config,
)


def test_gevrey_values_match_factorial_powers():
    W = make_weight_sequence("gevrey", 40, s=2.0)
    for p in (0, 1, 5, 17, 40):
        assert math.isclose(W.log(p), 2.0 * float(mpmath.log(mpmath.factorial(p))), rel_tol=1e-13, abs_tol=1e-13)


@pytest.mark.parametrize("cond", CONDITIONS)
def test_gevrey_two_passes_every_condition(cond):
    rep = check_condition(make_weight_sequence("gevrey", 256, s=2.0), cond)
    assert rep.holds_on_prefix
    assert rep.first_violation is None


def test_m2_witness_constants_reverify():
    W = make_weight_sequence("gevrey", 256, s=2.0)
    A, H = check_condition(W, "M2").witness_constants
    L = W.log_values
    p = np.arange(W.N + 1)
    for n in range(0, W.N + 1):
        q = p[: n + 1]
        lhs = L[n]
        rhs = math.log(A) + n * math.log(H) + np.min(L[q] + L[n - q])
        assert lhs <= rhs + 1e-12 * max(1.0, abs(lhs))


def _first_harmonic_crossing(threshold: float) -> int:
    # independent oracle: sum_{q<=p} M_{q-1}/M_q = H_p for M_p = p!
    total, p = mpmath.mpf(0), 0
    while total <= threshold:
        p += 1
        total += mpmath.mpf(1) / p
    return p


def test_factorial_fails_m3_prime_at_first_harmonic_crossing():
    rep = check_condition(make_weight_sequence("factorial", 256), "M3'")
    assert not rep.holds_on_prefix
    assert rep.first_violation == (_first_harmonic_crossing(10.0),)
    assert rep.first_violation == (12367,)
    assert rep.details["partial_sum_at_violation"] > 10.0


def test_factorial_crossing_inside_prefix_is_exact():
    rep = check_condition(make_weight_sequence("factorial", 20000), "M3'")
    assert rep.first_violation == (12367,)
    assert rep.details["extrapolated"] is False


def test_explicit_table_validation():
    with pytest.raises(ValueError, match="monotone"):
        make_weight_sequence("explicit", values=[1.0, 3.0, 2.0])
    with pytest.raises(ValueError, match="positive"):
        make_weight_sequence("explicit", values=[1.0, 0.0, 2.0])
    W = make_weight_sequence("explicit", values=[2.0, 4.0, 16.0])
    assert math.isclose(W[1], 2.0)


def test_gevrey_needs_positive_exponent():
    with pytest.raises(ValueError):
        make_weight_sequence("gevrey", 10, s=0.0)
    with pytest.raises(ValueError):
        weight_from_config({"family": "nonsense", "N": 4})


def test_product_inequality_violation_is_reported():
    # M_1^2 > M_2 breaks M_p M_q <= M_{p+q}
    W = make_weight_sequence("explicit", values=[1.0, 3.0, 4.0, 100.0])
    rep = check_product_inequality(W)
    assert rep.first_violation == (1, 1)


def test_multiindex_weight_and_associated_function():
    W = make_weight_sequence("gevrey", 30, s=2.0)
    assert multiindex_weight(W, (2, 3)) == pytest.approx(W[5])
    # M(rho) = sup_p log(rho^p / M_p)
    rho = 50.0
    expect = max(p * math.log(rho) - W.log(p) for p in range(W.N + 1))
    assert associated_function(W, rho) == pytest.approx(expect, rel=1e-12)


@given(st.floats(min_value=1.05, max_value=4.0), st.integers(min_value=16, max_value=200))
def test_gevrey_product_inequality_property(s, N):
    assert check_product_inequality(make_weight_sequence("gevrey", N, s=s)).holds_on_prefix


@given(st.floats(min_value=0.1, max_value=4.0), st.integers(min_value=16, max_value=200))
def test_gevrey_is_log_convex(s, N):
    assert check_condition(make_weight_sequence("gevrey", N, s=s), "M1").holds_on_prefix
