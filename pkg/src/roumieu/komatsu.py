"""Finite certification of slow increase and rapid decrease of sequences.

A nonnegative sequence ``(a_k)`` is *slowly increasing* when
``sup a_k / h^k < inf`` for some ``h > 0``, equivalently ``sup a_k / R_k < inf``
for every product sequence of the class R.  It is *rapidly decreasing* when
``sup h^k a_k < inf`` for every ``h``, equivalently ``sup R_k a_k < inf`` for
some ``(r_k)`` in the class.

On a finite prefix both directions become witness searches.  Verdicts are
three-valued and every witness is re-verified by evaluating its sup over the
whole prefix before a certificate is returned.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .rclass import RSequence, make_rsequence, product_sequence

__all__ = [
    "GrowthCertificate",
    "DecayCertificate",
    "classify_growth",
    "classify_decay",
    "cross_check_duality",
    "verify_h_witness",
    "verify_r_growth_witness",
    "verify_r_decay_witness",
    "H_GRID",
]

MIN_LENGTH = 16
#: doubling grid of h values
H_GRID = tuple(float(2**j) for j in range(0, 21))
#: trend slopes of log a_k / k against log k: below SLOW is flat, above FAST is superlinear
TREND_SLOW = 0.01
TREND_FAST = 0.05


@dataclass(frozen=True)
class GrowthCertificate:
    verdict: str
    h_witness: float | None = None
    bound: float | None = None
    r_witness: RSequence | None = None
    r_bound: float | None = None
    escaping: tuple[tuple[float, int, float], ...] = ()
    details: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "verdict": self.verdict,
            "h_witness": self.h_witness,
            "bound": self.bound,
            "r_witness_family": self.r_witness.family if self.r_witness is not None else None,
            "r_bound": self.r_bound,
            "escaping": [list(e) for e in self.escaping],
            "details": self.details,
        }


@dataclass(frozen=True)
class DecayCertificate:
    verdict: str
    r_witness: RSequence | None = None
    bound: float | None = None
    failing_h: float | None = None
    sampled_h: dict[float, bool] = field(default_factory=dict)
    details: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "verdict": self.verdict,
            "r_witness_family": self.r_witness.family if self.r_witness is not None else None,
            "bound": self.bound,
            "failing_h": self.failing_h,
            "sampled_h": {str(k): v for k, v in self.sampled_h.items()},
            "details": self.details,
        }


def _as_log(a, log_input: bool) -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 1:
        raise ValueError("expected a one-dimensional sequence")
    if arr.size < MIN_LENGTH:
        raise ValueError(f"sequence needs at least {MIN_LENGTH} entries, got {arr.size}")
    if log_input:
        if np.any(np.isnan(arr)) or np.any(arr == np.inf):
            raise ValueError("log-sequence entries must be finite or -inf")
        return arr
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise ValueError("sequence entries must be finite and nonnegative")
    with np.errstate(divide="ignore"):
        return np.log(arr)


def _log_sup(x: np.ndarray) -> float:
    return float(np.max(x)) if x.size else -math.inf


def _exp(x: float) -> float:
    return 0.0 if x == -math.inf else math.exp(min(x, 709.0))


def _trend(la: np.ndarray, sign: float) -> float | None:
    """Slope of ``sign * log a_k / k`` against ``log k`` over the tail half."""
    N = la.size - 1
    k = np.arange(max(1, N // 2), N + 1)
    v = la[k]
    keep = np.isfinite(v)
    if keep.sum() < 4:
        return None
    k, v = k[keep].astype(float), sign * v[keep]
    slope, _ = np.polyfit(np.log(k), v / k, 1)
    return float(slope)


def verify_h_witness(la: np.ndarray, h: float) -> float:
    """Log of ``sup_k a_k / h^k`` evaluated over the whole prefix."""
    k = np.arange(la.size)
    return _log_sup(la - k * math.log(h))


def verify_r_growth_witness(la: np.ndarray, r: RSequence) -> float:
    """Log of ``sup_k a_k / R_k``."""
    L = product_sequence(r).log_values[: la.size]
    return _log_sup(la[: L.size] - L)


def verify_r_decay_witness(la: np.ndarray, r: RSequence) -> float:
    """Log of ``sup_k R_k a_k``."""
    L = product_sequence(r).log_values[: la.size]
    return _log_sup(la[: L.size] + L)


def _linear_above(h: float, n: int) -> RSequence:
    """``r_0 = 1``, ``r_p = p + p0`` with every ``r_p`` (p >= 1) above ``h``."""
    p0 = max(0, int(math.floor(h)))
    v = np.arange(n, dtype=float) + p0
    v[0] = 1.0
    v[1:] = np.maximum(v[1:], 1.0)
    return RSequence(v, family=f"linear>>{p0}")


def _escaping(la: np.ndarray) -> tuple[tuple[float, int, float], ...]:
    """For every grid h the index maximising ``log(a_k / h^k)``."""
    k = np.arange(la.size)
    out = []
    for h in H_GRID[1:]:
        vals = la - k * math.log(h)
        i = int(np.argmax(vals))
        out.append((h, i, float(vals[i])))
    return tuple(out)


def classify_growth(a: Sequence[float] | np.ndarray, *, log_input: bool = False) -> GrowthCertificate:
    """Decide whether ``a`` is slowly increasing on its prefix.

    With ``log_input=True`` the entries are ``log a_k`` (``-inf`` for zeros),
    which allows very long prefixes of fast-growing sequences.
    """
    la = _as_log(a, log_input)
    N = la.size - 1
    if np.all(la == -math.inf):
        r = make_rsequence("linear", N)
        return GrowthCertificate("slowly_increasing", 1.0, 0.0, r, 0.0, details={"reason": "zero sequence"})

    b = _trend(la, 1.0)
    details: dict[str, Any] = {"trend_slope": b, "prefix_length": N}
    if b is None:
        # at most a few nonzero entries in the tail half: bounded by a geometric envelope
        b = 0.0
        details["trend_slope"] = None
    if b > TREND_FAST:
        return GrowthCertificate("not_slowly_increasing", escaping=_escaping(la), details=details)
    if b > TREND_SLOW:
        details["reason"] = "trend between the flat and superlinear margins"
        return GrowthCertificate("inconclusive", escaping=_escaping(la), details=details)

    k = np.arange(N + 1)
    tail = k >= N // 2
    fin = np.isfinite(la) & tail
    if fin.sum() >= 2:
        slope, _ = np.polyfit(k[fin].astype(float), la[fin], 1)
    else:
        slope = 0.0
    h_hat = math.exp(slope)
    h = 1.0 if h_hat <= 1.0 else float(2.0 ** math.ceil(math.log2(h_hat) - 1e-12))
    # keep doubling while the sup is still attained in the last quarter
    while True:
        vals = la - k * math.log(h)
        i = int(np.argmax(vals))
        if i < N - N // 4 or vals[i] <= vals[0] or h >= H_GRID[-1]:
            break
        h *= 2.0
    details["h_fit"] = h_hat
    vals = la - k * math.log(h)
    if int(np.argmax(vals)) >= N - N // 4 and vals.max() > _log_sup(vals[: N - N // 4]):
        details["reason"] = "no h on the grid keeps the sup inside the prefix"
        return GrowthCertificate("inconclusive", escaping=_escaping(la), details=details)

    log_bound = verify_h_witness(la, h)
    r = _linear_above(h, N + 1)
    log_rbound = verify_r_growth_witness(la, r)
    return GrowthCertificate(
        "slowly_increasing",
        h_witness=h,
        bound=_exp(log_bound),
        r_witness=r,
        r_bound=_exp(log_rbound),
        details=details,
    )


def _decay_witness(la: np.ndarray) -> RSequence | None:
    """``r_k = max(1, min_{j >= k, a_j > 0} (1/a_j)^{1/j})``, monotonised.

    Indices with no later positive entry continue linearly.
    """
    N = la.size - 1
    inv_root = np.full(N + 1, np.inf)
    j = np.arange(1, N + 1)
    pos = np.isfinite(la[1:])
    inv_root[1:][pos] = np.exp(-la[1:][pos] / j[pos])
    suffix_min = np.minimum.accumulate(inv_root[::-1])[::-1]
    r = np.ones(N + 1)
    for p in range(1, N + 1):
        m = suffix_min[p]
        r[p] = max(r[p - 1], 1.0, m) if np.isfinite(m) else r[p - 1] + 1.0
    if not r[-1] > 1.0:
        return None
    return RSequence(r, family="decay_witness")


def _sampled_a2(la: np.ndarray) -> dict[float, bool]:
    """For each grid h: does ``sup h^k a_k`` peak before the last quarter?"""
    N = la.size - 1
    k = np.arange(N + 1)
    out = {}
    cut = N - N // 4
    for h in H_GRID[1:]:
        vals = la + k * math.log(h)
        head = _log_sup(vals[:cut])
        tail = _log_sup(vals[cut:])
        out[h] = bool(tail <= head + 1e-12 * max(1.0, abs(head))) if head > -math.inf else tail == -math.inf
    return out


def _failing_h(la: np.ndarray) -> float | None:
    """Smallest grid h for which ``h^k a_k`` grows by more than a factor 10 across the tail."""
    N = la.size - 1
    k = np.arange(N + 1)
    half = N // 2
    for h in H_GRID[1:]:
        vals = la + k * math.log(h)
        if vals[N] > _log_sup(vals[: half + 1]) + math.log(10.0):
            return h
    return None


def classify_decay(a: Sequence[float] | np.ndarray, *, log_input: bool = False) -> DecayCertificate:
    """Decide whether ``a`` is rapidly decreasing on its prefix."""
    la = _as_log(a, log_input)
    N = la.size - 1
    sampled = _sampled_a2(la)
    fin = np.nonzero(np.isfinite(la))[0]
    if fin.size == 0:
        r = make_rsequence("linear", N)
        return DecayCertificate("rapidly_decreasing", r, 0.0, sampled_h=sampled, details={"reason": "zero sequence"})

    details: dict[str, Any] = {"prefix_length": N}
    b = _trend(la, -1.0)
    if b is None and fin[-1] < N // 2:
        details["reason"] = "finitely supported on the prefix"
        b = math.inf
    details["trend_slope"] = None if b is None or math.isinf(b) else b
    if b is None or b <= TREND_SLOW:
        return DecayCertificate("not_rapidly_decreasing", failing_h=_failing_h(la), sampled_h=sampled, details=details)
    if b <= TREND_FAST:
        details["reason"] = "trend between the flat and superlinear margins"
        return DecayCertificate("inconclusive", failing_h=_failing_h(la), sampled_h=sampled, details=details)

    r = _decay_witness(la)
    if r is None:
        details["reason"] = "no growing witness could be constructed"
        return DecayCertificate("inconclusive", sampled_h=sampled, details=details)
    log_bound = verify_r_decay_witness(la, r)
    details["r_final"] = float(r.values[-1])
    # the witness must keep growing over the tail, otherwise it certifies nothing
    half = r.values[N // 2]
    if not (r.values[-1] > 1.5 * half and math.isfinite(log_bound)):
        details["reason"] = "constructed witness does not grow over the tail"
        return DecayCertificate("inconclusive", sampled_h=sampled, details=details)
    return DecayCertificate("rapidly_decreasing", r, _exp(log_bound), sampled_h=sampled, details=details)


def _multi_indices(d: int, order: int):
    for k in itertools.product(range(order + 1), repeat=d):
        if sum(k) <= order:
            yield k


def cross_check_duality(a: Sequence[float] | np.ndarray, *, d: int = 1, max_order_nd: int = 24, log_input: bool = False) -> dict[str, Any]:
    """Run both classifiers and check that their witnesses are consistent.

    The multi-index variant reindexes ``a_k := a_{|k|}`` over ``k`` in
    ``N_0^d`` (orders up to ``max_order_nd``) and recomputes every sup by
    enumeration; it must coincide with the scalar value.
    """
    la = _as_log(a, log_input)
    g = classify_growth(la, log_input=True)
    dc = classify_decay(la, log_input=True)
    problems: list[str] = []

    if dc.verdict == "rapidly_decreasing" and g.verdict == "not_slowly_increasing":
        problems.append("rapid decrease certified while slow increase is refuted")
    if g.verdict == "slowly_increasing":
        if g.h_witness is None or g.r_witness is None:
            problems.append("slow increase certified without both witnesses")
        else:
            if not math.isclose(_exp(verify_h_witness(la, g.h_witness)), g.bound, rel_tol=1e-12, abs_tol=0.0):
                problems.append("h-witness bound does not re-verify")
            if not math.isclose(_exp(verify_r_growth_witness(la, g.r_witness)), g.r_bound, rel_tol=1e-12, abs_tol=0.0):
                problems.append("r-witness bound does not re-verify")
            # monotone closure: larger h gives a smaller or equal sup
            if verify_h_witness(la, 2 * g.h_witness) > verify_h_witness(la, g.h_witness) + 1e-12:
                problems.append("doubling h increased the sup")
    if dc.verdict == "rapidly_decreasing":
        if dc.r_witness is None or not math.isclose(_exp(verify_r_decay_witness(la, dc.r_witness)), dc.bound, rel_tol=1e-12, abs_tol=0.0):
            problems.append("decay witness does not re-verify")

    multi: dict[str, Any] = {"dimension": d}
    if d > 1:
        order = min(la.size - 1, max_order_nd)
        ks = list(_multi_indices(d, order))
        lengths = np.array([sum(k) for k in ks])
        vals = la[lengths]
        if g.h_witness is not None:
            nd = _log_sup(vals - lengths * math.log(g.h_witness))
            sc = verify_h_witness(la[: order + 1], g.h_witness)
            multi["h_sup_agrees"] = bool(nd == sc)
            if nd != sc:
                problems.append("multi-index h-sup differs from the scalar sup")
        if dc.r_witness is not None:
            L = product_sequence(dc.r_witness).log_values
            nd = _log_sup(vals + L[lengths])
            sc = _log_sup(la[: order + 1] + L[: order + 1])
            multi["r_sup_agrees"] = bool(nd == sc)
            if nd != sc:
                problems.append("multi-index R-sup differs from the scalar sup")
        multi["indices_checked"] = len(ks)

    return {
        "growth": g.to_dict(),
        "decay": dc.to_dict(),
        "consistent": not problems,
        "problems": problems,
        "multi_index": multi,
    }
