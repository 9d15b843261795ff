from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from roumieu.rclass import (
    RSequence,
    check_pp_inequality,
    check_superadditive,
    elementwise_min,
    make_rsequence,
    pp_minorant,
    product_sequence,
    scale_lambda,
    shift_rsequence,
)


def brute_pp(values) -> bool:
    # direct products in floating point, no logs
    R = [1.0]
    for v in values[1:]:
        R.append(R[-1] * v)
    N = len(values) - 1
    return all(R[p + q] <= 2.0 ** (p + q) * R[p] * R[q] * (1 + 1e-12) for p in range(N + 1) for q in range(N + 1 - p))


def test_families():
    assert make_rsequence("linear", 5).values.tolist() == [1, 1, 2, 3, 4, 5]
    np.testing.assert_allclose(make_rsequence("power", 4, alpha=0.5).values, [1, 1, math.sqrt(2), math.sqrt(3), 2])
    np.testing.assert_allclose(make_rsequence("log", 3).values, [1 + math.log(1 + p) for p in range(4)])
    with pytest.raises(ValueError):
        make_rsequence("power", 4)
    with pytest.raises(ValueError):
        make_rsequence("nope", 4)


@pytest.mark.parametrize("vals", [[2, 3], [1, 0.5, 2], [1, 1, 1], [1, np.inf]])
def test_invalid_sequences_rejected(vals):
    with pytest.raises(ValueError):
        RSequence(np.array(vals, dtype=float))


def test_product_sequence_is_factorial_for_linear():
    R = product_sequence(make_rsequence("linear", 30))
    np.testing.assert_allclose(R.log_values, [math.lgamma(p + 1) for p in range(31)], rtol=1e-13, atol=1e-13)


def test_linear_in_pp_and_superadditive():
    r = make_rsequence("linear", 256)
    assert check_pp_inequality(r).holds_on_prefix
    assert check_superadditive(product_sequence(r), d=2).holds_on_prefix


def test_pp_violation_reported():
    # a jump far above 2^p breaks the inequality at the jump
    fast = RSequence(np.array([1.0, 1.0, 1.0, 1.0, 100.0]))
    rep = check_pp_inequality(fast)
    assert not rep.holds_on_prefix
    assert rep.first_violation == (1, 3)
    assert not brute_pp(fast.values)


def test_pp_minorant_known_values():
    s = RSequence(np.array([1.0, 3.0, 3.0, 12.0, 12.0]))
    r = pp_minorant(s)
    # running min of s_j / j is 3, 1.5, 1.5, 1.5
    np.testing.assert_allclose(r.values, [1, 3, 3, 4.5, 6])
    assert np.all(r.values <= s.values + 1e-15)


def test_pp_minorant_slow_start_counts_nontrivial():
    # grows slowly for a long stretch and then linearly
    p = np.arange(400, dtype=float)
    s = np.where(p <= 128, 1 + 0.001 * p, 1 + 0.128 + (p - 128))
    s[0] = 1.0
    r = pp_minorant(RSequence(s))
    assert check_pp_inequality(r).holds_on_prefix
    assert brute_pp(r.values[:60])
    assert r.values[-1] > 1.0


def test_scale_and_shift():
    r = make_rsequence("linear", 10)
    s = scale_lambda(r, 3.0)
    assert s.values[0] == 1.0 and s.values[5] == 15.0
    with pytest.raises(ValueError):
        scale_lambda(r, 0.5)  # r_1 = 1 is not above 2
    t = shift_rsequence(r, 4.5)
    assert t.values[0] == 1.0 and np.all(t.values[1:] > 4.5)
    assert t.values[1] == 5.0
    with pytest.raises(ValueError):
        shift_rsequence(r, 100.0)


def test_elementwise_min_stays_in_class():
    a = make_rsequence("linear", 20)
    b = make_rsequence("log", 30)
    m = elementwise_min(a, b)
    assert m.N == 20
    np.testing.assert_array_equal(m.values, np.minimum(a.values, b.values[:21]))


@st.composite
def rsequences(draw, max_n=40):
    steps = draw(st.lists(st.floats(0.0, 3.0, allow_nan=False), min_size=2, max_size=max_n))
    v = np.concatenate(([1.0], 1.0 + np.cumsum(steps)))
    if v[-1] <= 1.0:
        v[-1] = 2.0
    return RSequence(v)


@given(rsequences())
def test_superadditive_matches_brute_force(r):
    L = product_sequence(r).log_values
    N = r.N
    brute = all(L[p] + L[q] <= L[p + q] + 1e-9 for p in range(N + 1) for q in range(N + 1 - p))
    assert check_superadditive(product_sequence(r)).holds_on_prefix == brute


@given(rsequences())
def test_pp_minorant_properties(s):
    r = pp_minorant(s)
    assert np.all(r.values <= s.values * (1 + 1e-12))
    assert np.all(np.diff(r.values) >= 0)
    ratio = r.values[1:] / np.arange(1, r.values.size)
    assert np.all(np.diff(ratio) <= 1e-12 * ratio[1:])
    assert check_pp_inequality(r).holds_on_prefix
    assert brute_pp(r.values[:40])


@given(rsequences(), st.floats(1.0, 5.0))
def test_pp_check_matches_brute_force(r, lam):
    s = scale_lambda(r, lam)
    assert check_pp_inequality(s).holds_on_prefix == brute_pp(s.values)
