"""Monotone sequences of the class R with their product sequences, plus the
inequalities used to manipulate Roumieu seminorms.

An :class:`RSequence` is a finite prefix ``r_0..r_N`` with ``r_0 = 1``,
nondecreasing, and with ``r_N > r_0`` as the finite witness of growth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .weights import REL_TOL, ConditionReport, _leq

__all__ = [
    "RSequence",
    "ProductSequence",
    "make_rsequence",
    "rsequence_from_config",
    "product_sequence",
    "scale_lambda",
    "shift_rsequence",
    "elementwise_min",
    "check_superadditive",
    "pp_minorant",
    "check_pp_inequality",
]


@dataclass(frozen=True, eq=False)
class RSequence:
    values: np.ndarray
    family: str = "explicit"

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise ValueError("an R-sequence needs at least r_0 and r_1")
        if not np.all(np.isfinite(v)):
            raise ValueError("R-sequence entries must be finite")
        if abs(v[0] - 1.0) > REL_TOL:
            raise ValueError("R-sequences start with r_0 = 1")
        v[0] = 1.0
        steps = np.diff(v)
        if np.any(steps < -REL_TOL * np.maximum(1.0, np.abs(v[1:]))):
            bad = int(np.argmax(steps < 0)) + 1
            raise ValueError(f"R-sequence is not nondecreasing at index {bad}")
        if not v[-1] > v[0]:
            raise ValueError("R-sequence shows no growth on the prefix (needs r_N > r_0)")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def N(self) -> int:
        return self.values.size - 1

    @property
    def log_values(self) -> np.ndarray:
        return np.log(self.values)

    def __len__(self) -> int:
        return self.values.size

    def __getitem__(self, p):
        return self.values[p]


@dataclass(frozen=True, eq=False)
class ProductSequence:
    """``R_p = prod_{i <= p} r_i`` kept in log form."""

    log_values: np.ndarray
    source: RSequence

    @property
    def N(self) -> int:
        return self.log_values.size - 1

    @property
    def values(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_values)

    def log(self, p: int) -> float:
        return float(self.log_values[p])


def make_rsequence(family: str, N: int, *, alpha: float | None = None, values: Sequence[float] | None = None) -> RSequence:
    """Named families: ``linear`` (max(1, p)), ``power`` (max(1, p^alpha)),
    ``log`` (1 + log(1 + p)) and ``explicit``."""
    if family == "explicit":
        if values is None:
            raise ValueError("explicit R-sequence needs values")
        return RSequence(np.asarray(values, dtype=float), family="explicit")
    if N < 1:
        raise ValueError("N must be at least 1")
    p = np.arange(N + 1, dtype=float)
    if family == "linear":
        v = np.maximum(1.0, p)
    elif family == "power":
        if alpha is None or alpha <= 0:
            raise ValueError("power family needs alpha > 0")
        v = np.maximum(1.0, p**alpha)
    elif family == "log":
        v = 1.0 + np.log1p(p)
    else:
        raise ValueError(f"unknown R-sequence family {family!r}")
    v[0] = 1.0
    return RSequence(v, family=family)


def rsequence_from_config(cfg: dict[str, Any], N: int) -> RSequence:
    return make_rsequence(cfg.get("family", "linear"), cfg.get("N", N), alpha=cfg.get("alpha"), values=cfg.get("values"))


def product_sequence(r: RSequence) -> ProductSequence:
    return ProductSequence(np.cumsum(np.log(r.values)), r)


def scale_lambda(r: RSequence, lam: float) -> RSequence:
    """``lambda(r_p)``: keep ``r_0 = 1`` and multiply the rest by ``lam``."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if lam < 1 and not r.values[1] > 1.0 / lam:
        raise ValueError(f"scaling by {lam} leaves the class: needs r_1 > {1.0 / lam}, got r_1 = {r.values[1]}")
    v = r.values.copy()
    v[1:] *= lam
    return RSequence(v, family=f"{r.family}*{lam:g}")


def shift_rsequence(r: RSequence, c: float) -> RSequence:
    """Drop an initial segment so that every entry past index 0 exceeds ``c``.

    Returns ``r~_0 = 1`` and ``r~_p = r_{p + p0}`` where ``p0 >= 0`` is the
    smallest index with ``r_p > c`` for all ``p > p0``.
    """
    v = r.values
    above = np.nonzero(v > c)[0]
    if above.size == 0:
        raise ValueError(f"no entry of the prefix exceeds {c}; extend the R-sequence")
    p0 = max(0, int(above[0]) - 1)
    if p0 == 0:
        return r
    tail = v[p0 + 1 :]
    if tail.size < 1:
        raise ValueError("shift leaves an empty prefix")
    return RSequence(np.concatenate(([1.0], tail)), family=f"{r.family}>>{p0}")


def elementwise_min(a: RSequence, b: RSequence) -> RSequence:
    """``min(a_p, b_p)`` on the common prefix; stays in the class."""
    n = min(a.values.size, b.values.size)
    return RSequence(np.minimum(a.values[:n], b.values[:n]), family=f"min({a.family},{b.family})")


def _pair_grid(N: int) -> tuple[np.ndarray, np.ndarray]:
    """All (p, q) with p + q <= N ordered by total index, then p."""
    tot, p = [], []
    for n in range(N + 1):
        tot.append(np.full(n + 1, n))
        p.append(np.arange(n + 1))
    t = np.concatenate(tot)
    pp = np.concatenate(p)
    return pp, t - pp


def check_superadditive(R: ProductSequence, d: int = 1) -> ConditionReport:
    """``R_|k| R_|l| <= R_|k+l|`` for multi-indices in dimension ``d``.

    The inequality only depends on the orders, so the check runs over scalar
    pairs ``(p, q)`` with ``p + q <= N``.
    """
    L = R.log_values
    pp, qq = _pair_grid(R.N)
    ok = _leq(L[pp] + L[qq], L[pp + qq])
    details = {"dimension": d}
    if ok.all():
        return ConditionReport("superadditive", True, R.N, details=details)
    i = int(np.argmin(ok))
    return ConditionReport("superadditive", False, R.N, first_violation=(int(pp[i]), int(qq[i])), details=details)


def pp_minorant(s: RSequence) -> RSequence:
    """Minorant ``r_p = p * min_{1<=j<=p} s_j / j`` (``r_0 = 1``).

    ``r_p / p`` is nonincreasing, which gives
    ``R_{p+q} <= C(p+q, q) R_p R_q <= 2^{p+q} R_p R_q``.
    """
    v = s.values
    p = np.arange(1, v.size, dtype=float)
    m = np.minimum.accumulate(v[1:] / p)
    r = np.concatenate(([1.0], p * m))
    # r_1 = s_1 >= 1 and r is nondecreasing; clean up rounding at ties
    r = np.maximum.accumulate(r)
    return RSequence(r, family=f"pp({s.family})")


def check_pp_inequality(r: RSequence) -> ConditionReport:
    """Exhaustive ``R_{p+q} <= 2^{p+q} R_p R_q`` over ``p + q <= N``."""
    L = product_sequence(r).log_values
    pp, qq = _pair_grid(r.N)
    ok = _leq(L[pp + qq], (pp + qq) * math.log(2.0) + L[pp] + L[qq])
    if ok.all():
        return ConditionReport("inPP", True, r.N)
    i = int(np.argmin(ok))
    return ConditionReport("inPP", False, r.N, first_violation=(int(pp[i]), int(qq[i])))
