"""Weight sequences (M_p) on a finite prefix.

All arithmetic is carried out on ``log M_p`` so that prefixes such as
``(p!)^2`` for ``p <= 256`` never overflow.  Conditions are decided on the
stored prefix only; a report saying ``holds_on_prefix`` means "holds for
every index in ``[0, N]``".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy.special import gammaln, zeta

__all__ = [
    "CONDITIONS",
    "ConditionReport",
    "WeightSequence",
    "make_weight_sequence",
    "weight_from_config",
    "check_condition",
    "check_product_inequality",
    "multiindex_weight",
    "associated_function",
]

CONDITIONS = ("M1", "M2", "M2'", "M3", "M3'", "Mpq")

#: relative tolerance used for every log-domain comparison
REL_TOL = 1e-12
#: largest power-of-two exponent tried for the constants A and H
MAX_EXPONENT = 64
#: the (A, H) search accepts the smallest H whose companion A stays below 2**A_CAP_EXPONENT
A_CAP_EXPONENT = 16
#: fitted tail exponents must exceed 1 by this margin to count as summable
GAMMA_MARGIN = 1e-3


def _leq(lhs, rhs):
    """Log-domain ``lhs <= rhs`` with relative tolerance; ties count as satisfied."""
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    scale = np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
    return lhs <= rhs + REL_TOL * scale


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of checking one condition on a finite prefix."""

    condition: str
    holds_on_prefix: bool
    prefix_length: int
    witness_constants: tuple[float, float] | None = None
    first_violation: tuple[int, ...] | None = None
    details: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.holds_on_prefix != (self.first_violation is None):
            raise ValueError("holds_on_prefix must be true exactly when no violation is recorded")

    def to_dict(self) -> dict[str, Any]:
        return {
            "condition": self.condition,
            "holds_on_prefix": self.holds_on_prefix,
            "prefix_length": self.prefix_length,
            "witness_constants": list(self.witness_constants) if self.witness_constants else None,
            "first_violation": list(self.first_violation) if self.first_violation else None,
            "details": self.details,
        }


@dataclass(frozen=True, eq=False)
class WeightSequence:
    """Finite prefix ``M_0..M_N`` stored as logarithms, with ``M_0 = 1``."""

    log_values: np.ndarray
    family: str = "explicit"
    s: float | None = None

    def __post_init__(self):
        lv = np.asarray(self.log_values, dtype=float)
        if lv.ndim != 1 or lv.size < 2:
            raise ValueError("a weight sequence needs at least M_0 and M_1")
        if not np.all(np.isfinite(lv)):
            raise ValueError("weight sequence entries must be finite and positive")
        if lv[0] != 0.0:
            raise ValueError("weight sequences are normalised to M_0 = 1")
        lv.setflags(write=False)
        object.__setattr__(self, "log_values", lv)

    @property
    def N(self) -> int:
        return self.log_values.size - 1

    @property
    def values(self) -> np.ndarray:
        # may contain inf for long Gevrey prefixes; use log_values for arithmetic
        with np.errstate(over="ignore"):
            return np.exp(self.log_values)

    def log(self, p: int) -> float:
        if not 0 <= p <= self.N:
            raise IndexError(f"index {p} outside the stored prefix [0, {self.N}]")
        return float(self.log_values[p])

    def __getitem__(self, p: int) -> float:
        return math.exp(self.log(p))

    def __len__(self) -> int:
        return self.log_values.size

    def describe(self) -> dict[str, Any]:
        out: dict[str, Any] = {"family": self.family, "N": self.N}
        if self.s is not None:
            out["s"] = self.s
        return out


def make_weight_sequence(
    family: str,
    N: int | None = None,
    *,
    s: float | None = None,
    values: Sequence[float] | None = None,
) -> WeightSequence:
    """Build ``(p!)^s`` (gevrey), ``p!`` (factorial) or an explicit table.

    Explicit tables must be positive and nondecreasing; they are rescaled so
    that ``M_0 = 1``.
    """
    if family == "explicit":
        if values is None:
            raise ValueError("explicit weight family needs a table of values")
        arr = np.asarray(values, dtype=float)
        if N is not None and arr.size != N + 1:
            raise ValueError(f"explicit table has {arr.size} entries, expected N + 1 = {N + 1}")
        if arr.size < 2:
            raise ValueError("explicit table needs at least two entries")
        if np.any(~np.isfinite(arr)) or np.any(arr <= 0):
            raise ValueError("explicit weight table must be strictly positive")
        if np.any(np.diff(arr) < 0):
            bad = int(np.argmax(np.diff(arr) < 0)) + 1
            raise ValueError(f"explicit weight table is not monotone at index {bad}")
        lv = np.log(arr) - math.log(arr[0])
        return WeightSequence(lv, family="explicit")

    if N is None or N < 1:
        raise ValueError("N must be a positive integer")
    p = np.arange(N + 1, dtype=float)
    if family == "factorial":
        return WeightSequence(gammaln(p + 1.0), family="factorial", s=1.0)
    if family == "gevrey":
        if s is None or not s > 0:
            raise ValueError("gevrey family needs a positive exponent s")
        return WeightSequence(float(s) * gammaln(p + 1.0), family="gevrey", s=float(s))
    raise ValueError(f"unknown weight family {family!r}")


def weight_from_config(cfg: dict[str, Any]) -> WeightSequence:
    family = cfg.get("family", "gevrey")
    return make_weight_sequence(family, cfg.get("N"), s=cfg.get("s"), values=cfg.get("values"))


# ---------------------------------------------------------------------------
# condition checks
# ---------------------------------------------------------------------------


def _pow2_at_least(x: float) -> float:
    """Smallest power of two (>= 1) that is >= x."""
    if x <= 1.0:
        return 1.0
    return float(2.0 ** math.ceil(math.log2(x) - 1e-12))


def _check_m1(W: WeightSequence) -> ConditionReport:
    L = W.log_values
    lhs = 2.0 * L[1:-1]
    rhs = L[:-2] + L[2:]
    ok = _leq(lhs, rhs)
    if ok.all():
        return ConditionReport("M1", True, W.N)
    p = int(np.argmin(ok)) + 1
    return ConditionReport("M1", False, W.N, first_violation=(p,))


def _m2_excess(W: WeightSequence) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All (p, q) with q <= p and the excess ``log M_p - log M_q - log M_{p-q}``."""
    L = W.log_values
    pp, qq = np.tril_indices(W.N + 1)
    return pp, qq, L[pp] - L[qq] - L[pp - qq]


def _search_constants(p: np.ndarray, excess: np.ndarray) -> tuple[float, float] | None:
    """Smallest power-of-two H (then A) with ``excess <= log A + p log H``."""
    for h in range(MAX_EXPONENT + 1):
        logH = h * math.log(2.0)
        need = float(np.max(excess - p * logH))
        # ties are satisfied: absorb the comparison tolerance before rounding up
        need -= REL_TOL * max(1.0, float(np.max(np.abs(excess))))
        A = _pow2_at_least(math.exp(min(need, 700.0)))
        if math.log2(A) <= A_CAP_EXPONENT:
            return A, float(2.0**h)
    return None


def _check_m2(W: WeightSequence, cond: str) -> ConditionReport:
    if cond == "M2":
        p, q, excess = _m2_excess(W)
    else:
        L = W.log_values
        # M_{p+1} <= A H^p M_p
        p = np.arange(0, W.N)
        q = np.ones_like(p)
        excess = L[1:] - L[:-1]
    consts = _search_constants(p.astype(float), excess)
    if consts is None:
        worst = int(np.argmax(excess / np.maximum(p, 1)))
        return ConditionReport(cond, False, W.N, first_violation=(int(p[worst]), int(q[worst])))
    A, H = consts
    ok = _leq(excess, math.log(A) + p * math.log(H))
    assert ok.all()
    return ConditionReport(cond, True, W.N, witness_constants=(A, H))


def _tail_fit(W: WeightSequence) -> tuple[float, float]:
    """Fit ``M_{p-1}/M_p ~ c p^-gamma`` on the last quarter of the prefix."""
    L = W.log_values
    N = W.N
    lo = max(1, N - N // 4)
    p = np.arange(lo, N + 1, dtype=float)
    log_ratio = L[lo - 1 : N] - L[lo : N + 1]
    slope, intercept = np.polyfit(np.log(p), log_ratio, 1)
    return float(math.exp(intercept)), float(-slope)


def _tail_sum(c: float, gamma: float, N: int) -> float:
    if gamma <= 1.0 + GAMMA_MARGIN:
        return math.inf
    return float(c * zeta(gamma, N + 1))


def _first_crossing(start: float, start_index: int, c: float, gamma: float, threshold: float) -> tuple[int, float]:
    """First P > start_index where ``start + sum_{start_index < p <= P} c p^-gamma`` exceeds threshold."""
    total = start
    base = start_index
    chunk = 1 << 16
    while base < 10**8:
        p = np.arange(base + 1, base + chunk + 1, dtype=float)
        partial = total + np.cumsum(c * p**-gamma)
        hit = np.nonzero(partial > threshold)[0]
        if hit.size:
            i = int(hit[0])
            return int(p[i]), float(partial[i])
        total = float(partial[-1])
        base += chunk
        chunk = min(chunk * 2, 1 << 22)
    # beyond the summation budget: integral estimate of the crossing index
    if gamma == 1.0:
        P = base * math.exp((threshold - total) / c)
    else:
        P = ((threshold - total) * (1 - gamma) / c + base ** (1 - gamma)) ** (1 / (1 - gamma))
    return int(math.ceil(P)), threshold


def _check_m3_prime(W: WeightSequence, threshold: float) -> ConditionReport:
    L = W.log_values
    ratios = np.exp(L[:-1] - L[1:])
    partial = np.cumsum(ratios)
    c, gamma = _tail_fit(W) if W.N >= 16 else (math.nan, math.nan)
    details: dict[str, Any] = {"fitted_c": c, "fitted_gamma": gamma, "prefix_sum": float(partial[-1])}
    over = np.nonzero(partial > threshold)[0]
    if over.size:
        P = int(over[0]) + 1
        details.update(divergence_threshold=threshold, partial_sum_at_violation=float(partial[P - 1]), extrapolated=False)
        return ConditionReport("M3'", False, W.N, first_violation=(P,), details=details)
    if W.N < 16:
        raise ValueError("tail extrapolation for M3' needs a prefix with N >= 16")
    tail = _tail_sum(c, gamma, W.N)
    if math.isfinite(tail):
        total = float(partial[-1]) + tail
        details["extrapolated_sum"] = total
        return ConditionReport("M3'", True, W.N, witness_constants=(total, 1.0), details=details)
    P, value = _first_crossing(float(partial[-1]), W.N, c, gamma, threshold)
    details.update(divergence_threshold=threshold, partial_sum_at_violation=value, extrapolated=True)
    return ConditionReport("M3'", False, W.N, first_violation=(P,), details=details)


def _check_m3(W: WeightSequence) -> ConditionReport:
    if W.N < 16:
        raise ValueError("tail extrapolation for M3 needs a prefix with N >= 16")
    L = W.log_values
    N = W.N
    ratios = np.exp(L[:-1] - L[1:])  # ratios[p-1] = M_{p-1}/M_p
    c, gamma = _tail_fit(W)
    details: dict[str, Any] = {"fitted_c": c, "fitted_gamma": gamma}
    tail = _tail_sum(c, gamma, N)
    if not math.isfinite(tail):
        details["reason"] = "tail of M_{p-1}/M_p is not summable under the fitted model"
        return ConditionReport("M3", False, N, first_violation=(1,), details=details)
    # S_q = sum_{p > q} M_{p-1}/M_p for q = 1..N-1
    suffix = np.cumsum(ratios[::-1])[::-1]  # suffix[i] = sum_{p >= i+1}
    q = np.arange(1, N)
    S = suffix[q] + tail
    rhs = q * ratios[q]  # q * M_q / M_{q+1}
    need = float(np.max(S / rhs))
    asymptotic = 1.0 / (gamma - 1.0)
    A = _pow2_at_least(max(need, asymptotic) * (1 + 1e-12))
    details.update(max_ratio_on_prefix=need, asymptotic_ratio=asymptotic)
    return ConditionReport("M3", True, N, witness_constants=(A, 1.0), details=details)


def check_condition(W: WeightSequence, cond: str, *, divergence_threshold: float = 10.0) -> ConditionReport:
    """Decide one of ``M1, M2, M2', M3, M3', Mpq`` on the stored prefix."""
    if cond == "M1":
        return _check_m1(W)
    if cond in ("M2", "M2'"):
        return _check_m2(W, cond)
    if cond == "M3":
        return _check_m3(W)
    if cond == "M3'":
        return _check_m3_prime(W, divergence_threshold)
    if cond == "Mpq":
        return check_product_inequality(W)
    raise ValueError(f"unknown condition {cond!r}; expected one of {CONDITIONS}")


def check_product_inequality(W: WeightSequence) -> ConditionReport:
    """Exhaustive check of ``M_p M_q <= M_{p+q}`` for ``p + q <= N``."""
    L = W.log_values
    n = np.arange(W.N + 1)
    pp, qq = np.meshgrid(n, n, indexing="ij")
    mask = pp + qq <= W.N
    pp, qq = pp[mask], qq[mask]
    ok = _leq(L[pp] + L[qq], L[pp + qq])
    if ok.all():
        return ConditionReport("Mpq", True, W.N)
    # report in order of increasing total index, then p
    bad = np.nonzero(~ok)[0]
    order = np.lexsort((pp[bad], pp[bad] + qq[bad]))
    i = bad[order[0]]
    return ConditionReport("Mpq", False, W.N, first_violation=(int(pp[i]), int(qq[i])))


def multiindex_weight(W: WeightSequence, k: Sequence[int]) -> float:
    """``M_k := M_{|k|}`` for a multi-index ``k``."""
    order = int(sum(k))
    if any(int(ki) < 0 for ki in k):
        raise ValueError("multi-index entries must be nonnegative")
    if order > W.N:
        raise IndexError(f"|k| = {order} exceeds the stored prefix N = {W.N}")
    return math.exp(W.log_values[order])


def associated_function(W: WeightSequence, rho):
    """``M(rho) = max_p log+(rho^p / M_p)`` over the stored prefix."""
    r = np.asarray(rho, dtype=float)
    if np.any(r <= 0):
        raise ValueError("rho must be positive")
    p = np.arange(W.N + 1)
    vals = np.multiply.outer(np.log(r), p) - W.log_values
    out = np.maximum(vals.max(axis=-1), 0.0)
    return float(out) if out.ndim == 0 else out
