from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from roumieu.komatsu import (
    classify_decay,
    classify_growth,
    cross_check_duality,
    verify_h_witness,
    verify_r_decay_witness,
)
from roumieu.rclass import make_rsequence

N = 200
K = np.arange(N + 1)
LOG_FACT = np.array([math.lgamma(k + 1) for k in K])


def test_geometric_is_slowly_increasing():
    cert = classify_growth(K * math.log(3.0), log_input=True)
    assert cert.verdict == "slowly_increasing"
    # independent re-check of the sup a_k / h^k
    h = cert.h_witness
    sup = max((3.0 / h) ** k for k in range(N + 1))
    assert math.isclose(cert.bound, sup, rel_tol=1e-12)
    assert h >= 3.0


def test_factorial_is_not_slowly_increasing():
    cert = classify_growth(LOG_FACT, log_input=True)
    assert cert.verdict == "not_slowly_increasing"
    # for small h the sup of k!/h^k is attained at the end of the prefix
    assert all(i == N for h, i, _ in cert.escaping if h <= 16)


def test_inverse_factorial_is_rapidly_decreasing():
    cert = classify_decay(-LOG_FACT, log_input=True)
    assert cert.verdict == "rapidly_decreasing"
    L = np.cumsum(np.log(cert.r_witness.values))[: N + 1]
    assert math.isclose(cert.bound, math.exp(np.max(L - LOG_FACT)), rel_tol=1e-12)
    assert cert.r_witness.values[-1] > cert.r_witness.values[N // 2]


def test_geometric_decay_is_not_rapid():
    cert = classify_decay(-K * math.log(2.0), log_input=True)
    assert cert.verdict == "not_rapidly_decreasing"
    assert cert.failing_h is not None and cert.failing_h > 2.0


def test_slow_gevrey_decay_is_inconclusive_on_short_prefix():
    assert classify_decay(-0.5 * LOG_FACT, log_input=True).verdict == "inconclusive"


def test_zero_sequence():
    z = np.zeros(32)
    assert classify_growth(z).verdict == "slowly_increasing"
    assert classify_decay(z).verdict == "rapidly_decreasing"


def test_input_validation():
    with pytest.raises(ValueError):
        classify_growth(np.ones(4))
    with pytest.raises(ValueError):
        classify_growth(-np.ones(32))
    with pytest.raises(ValueError):
        classify_decay(np.full(32, np.nan), log_input=True)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_duality_cross_check(d):
    for la in (K * math.log(3.0), -LOG_FACT, LOG_FACT):
        out = cross_check_duality(la, d=d, max_order_nd=12, log_input=True)
        assert out["consistent"], out["problems"]


def test_witness_sups_match_direct_enumeration():
    la = -LOG_FACT[:60]
    r = make_rsequence("linear", 59)
    # R_k = k! so sup_k R_k a_k = 1
    assert math.isclose(math.exp(verify_r_decay_witness(la, r)), 1.0, rel_tol=1e-12)
    assert verify_h_witness(np.zeros(60), 2.0) == 0.0


@given(st.floats(1.1, 50.0))
def test_geometric_growth_property(base):
    cert = classify_growth(K * math.log(base), log_input=True)
    assert cert.verdict == "slowly_increasing"
    assert cert.h_witness >= base * (1 - 1e-12)
    assert cert.bound <= 1.0 + 1e-9


@given(st.floats(1.0, 3.0))
def test_gevrey_decay_property(s):
    # a_k = (k!)^{-s}; for s < 1 the witness grows too slowly to certify on this prefix
    cert = classify_decay(-s * LOG_FACT, log_input=True)
    assert cert.verdict == "rapidly_decreasing"
    L = np.cumsum(np.log(cert.r_witness.values))[: N + 1]
    assert math.isclose(cert.bound, math.exp(np.max(L - s * LOG_FACT)), rel_tol=1e-12)
