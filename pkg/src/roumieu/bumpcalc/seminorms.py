"""Derivative sups and the Roumieu seminorm families.

Every seminorm is ``sup_{|k| <= K_max} sup_x weight(x) |d^k phi(x)| / den(k)``
with ``den(k)`` one of ``h^{|k|} M_k`` or ``R_{|k|} M_k``.  Since
``|D^k phi| = |d^k phi|`` the real partials are used throughout.

Sups over ``x`` are taken on a dense grid over each sampling piece of the
function and refined by bounded scalar maximisation around the best grid
points.  Separable tensors and dilations use exact reductions to their
factors, so uniform bounds for dilated profiles hold without sampling error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.optimize import minimize_scalar

from ..rclass import RSequence, product_sequence, scale_lambda
from ..weights import WeightSequence, make_weight_sequence
from .algebra import Dilated, Tensor, TestFunction, TruncationOrderError, Zero, multi_indices, product

__all__ = [
    "KINDS",
    "MAX_ORDER",
    "GRID_POINTS",
    "SeminormParams",
    "SeminormResult",
    "sup_table",
    "seminorm",
    "check_product_seminorm",
    "default_weight",
]

KINDS = ("qKh", "inf_h", "K_r", "r", "weighted_g_r")
#: derivative orders beyond this are refused
MAX_ORDER = 64
#: grid points per axis by dimension
GRID_POINTS = {1: 512, 2: 96, 3: 32}
REFINE_CANDIDATES = 3
REFINE_XTOL = 1e-10


def default_weight(K_max: int) -> WeightSequence:
    return make_weight_sequence("gevrey", max(K_max, 16), s=2.0)


@dataclass(frozen=True, eq=False)
class SeminormParams:
    kind: str
    K: np.ndarray | None = None
    h: float | None = None
    r: RSequence | None = None
    g: TestFunction | None = None
    K_max: int = 16
    W: WeightSequence | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown seminorm kind {self.kind!r}")
        if self.K_max < 8:
            raise ValueError("K_max must be at least 8")
        if self.K_max > MAX_ORDER:
            raise TruncationOrderError(f"K_max = {self.K_max} exceeds the derivative-closure guard {MAX_ORDER}")
        needs = {
            "qKh": ("K", "h"),
            "inf_h": ("h",),
            "K_r": ("K", "r"),
            "r": ("r",),
            "weighted_g_r": ("g", "r"),
        }[self.kind]
        for name in ("K", "h", "r", "g"):
            present = getattr(self, name) is not None
            if present != (name in needs):
                state = "missing" if name in needs else "not allowed"
                raise ValueError(f"seminorm kind {self.kind}: parameter {name} {state}")
        if self.K is not None:
            object.__setattr__(self, "K", np.atleast_2d(np.asarray(self.K, dtype=float)))
        if self.h is not None and not self.h > 0:
            raise ValueError("h must be positive")
        if self.r is not None and self.r.N < self.K_max:
            raise ValueError("the R-sequence prefix is shorter than K_max")
        if self.W is not None and self.W.N < self.K_max:
            raise ValueError("the weight prefix is shorter than K_max")

    def weight(self) -> WeightSequence:
        return self.W if self.W is not None else default_weight(self.K_max)

    def log_denominators(self) -> np.ndarray:
        """``log den`` for orders ``0..K_max``."""
        n = np.arange(self.K_max + 1)
        LM = self.weight().log_values[: self.K_max + 1]
        if self.kind in ("qKh", "inf_h"):
            return n * math.log(self.h) + LM
        return product_sequence(self.r).log_values[: self.K_max + 1] + LM


@dataclass(frozen=True)
class SeminormResult:
    kind: str
    value: float
    k: tuple[int, ...] | None
    x: tuple[float, ...] | None
    stabilized: bool
    per_order: tuple[float, ...] = ()
    details: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "value": self.value,
            "k": list(self.k) if self.k is not None else None,
            "x": list(self.x) if self.x is not None else None,
            "stabilized": self.stabilized,
            "per_order": list(self.per_order),
        }


# ---------------------------------------------------------------------------
# sups of |weight * d^k f|
# ---------------------------------------------------------------------------


def _grid(box: np.ndarray, n: int) -> np.ndarray:
    axes = [np.linspace(lo, hi, n) for lo, hi in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _refine(fk: TestFunction, g: TestFunction | None, x0: np.ndarray, piece: np.ndarray, step: np.ndarray) -> tuple[float, np.ndarray]:
    x = x0.copy()

    def mag(pt):
        v = np.abs(fk(pt[None, :]))[0]
        if g is not None:
            v *= abs(g(pt[None, :])[0])
        return float(v)

    best = mag(x)
    for _ in range(2 if x.size > 1 else 1):
        for i in range(x.size):
            lo = max(piece[i, 0], x[i] - step[i])
            hi = min(piece[i, 1], x[i] + step[i])
            if hi <= lo:
                continue

            def neg(t, i=i):
                y = x.copy()
                y[i] = t
                return -mag(y)

            res = minimize_scalar(neg, bounds=(lo, hi), method="bounded", options={"xatol": REFINE_XTOL})
            if -res.fun > best:
                best = -float(res.fun)
                x[i] = float(res.x)
    return best, x


def _generic_table(f: TestFunction, ks: list[tuple[int, ...]], K: np.ndarray | None, g: TestFunction | None) -> dict:
    n = GRID_POINTS.get(f.dim, 12)
    pieces = []
    for p in f.pieces():
        if K is not None:
            p = np.stack([np.maximum(p[:, 0], K[:, 0]), np.minimum(p[:, 1], K[:, 1])], axis=1)
            if np.any(p[:, 1] < p[:, 0]):
                continue
        pieces.append(p)
    table: dict = {}
    if not pieces:
        return {k: (0.0, None) for k in ks}
    grids = [(p, _grid(p, n)) for p in pieces]
    gvals = [np.abs(g(pts)) if g is not None else None for _, pts in grids]
    for k in ks:
        fk = f.partial(k)
        cands = []
        if not fk.is_zero:
            for (p, pts), gv in zip(grids, gvals):
                v = np.abs(fk(pts))
                if gv is not None:
                    v = v * gv
                top = np.argsort(v)[::-1][:REFINE_CANDIDATES]
                step = (p[:, 1] - p[:, 0]) / (n - 1)
                cands.extend((float(v[i]), pts[i], p, step) for i in top)
        if not cands or max(c[0] for c in cands) == 0.0:
            table[k] = (0.0, None)
            continue
        cands.sort(key=lambda c: -c[0])
        best, bx = cands[0][0], cands[0][1]
        for val, x0, p, step in cands[:REFINE_CANDIDATES]:
            v, x = _refine(fk, g, x0, p, step)
            if v > best:
                best, bx = v, x
        table[k] = (best, tuple(float(t) for t in bx))
    return table


def sup_table(f: TestFunction, K_max: int, *, K: np.ndarray | None = None, g: TestFunction | None = None) -> dict:
    """``{k: (sup_x |g d^k f|, argmax)}`` for all ``|k| <= K_max``."""
    if K_max > MAX_ORDER:
        raise TruncationOrderError(f"K_max = {K_max} exceeds the derivative-closure guard {MAX_ORDER}")
    ks = multi_indices(f.dim, K_max)
    if isinstance(f, Zero) or f.is_zero:
        return {k: (0.0, None) for k in ks}
    contains = K is None or (
        np.all(np.isfinite(f.bbox())) and np.all(K[:, 0] <= f.bbox()[:, 0]) and np.all(K[:, 1] >= f.bbox()[:, 1])
    )
    if g is None and contains:
        if isinstance(f, Dilated):
            inner = sup_table(f.f, K_max)
            return {k: (v * f.a ** (-sum(k)), None if x is None else tuple(t * f.a for t in x)) for k, (v, x) in inner.items()}
        if isinstance(f, Tensor):
            subs = [sup_table(h, K_max) for h in f.factors]
            out = {}
            for k in ks:
                parts = f._split(k)
                vals = [subs[i][tuple(kk)] for i, kk in enumerate(parts)]
                val = math.prod(v for v, _ in vals)
                x = None if val == 0 or any(x is None for _, x in vals) else tuple(t for _, x in vals for t in x)
                out[k] = (val, x)
            return out
    return _generic_table(f, ks, K, g)


def seminorm(phi: TestFunction, params: SeminormParams) -> SeminormResult:
    """Evaluate the seminorm described by ``params``; reports the maximising ``(k, x)``."""
    K = params.K
    if params.kind in ("qKh", "K_r"):
        bb = phi.bbox()
        if not (np.all(K[:, 0] <= bb[:, 0]) and np.all(K[:, 1] >= bb[:, 1])) and not phi.is_zero:
            # the sup is still restricted to K; flag that the support leaves it
            support_in_K = False
        else:
            support_in_K = True
    else:
        support_in_K = None
    table = sup_table(phi, params.K_max, K=K, g=params.g)
    logden = params.log_denominators()
    best, arg = 0.0, (None, None)
    per_order = np.zeros(params.K_max + 1)
    for k, (v, x) in table.items():
        n = sum(k)
        q = v * math.exp(-logden[n]) if v > 0 else 0.0
        per_order[n] = max(per_order[n], q)
        if q > best:
            best, arg = q, (k, x)
    top = int(np.argmax(per_order)) if best > 0 else 0
    stabilized = best == 0 or top < params.K_max
    details = {"support_in_K": support_in_K} if support_in_K is not None else {}
    return SeminormResult(params.kind, float(best), arg[0], arg[1], bool(stabilized), tuple(float(v) for v in per_order), details)


def check_product_seminorm(
    phi1: TestFunction,
    phi2: TestFunction,
    r: RSequence,
    *,
    K_max: int = 12,
    W: WeightSequence | None = None,
    rel_slack: float = 1e-9,
) -> dict[str, Any]:
    """``||phi1 phi2||_(r) <= ||phi1||_(r/2) ||phi2||_(r/2)`` at truncation ``K_max``."""
    if not r.values[1] > 2.0:
        raise ValueError("the product inequality needs r_1 > 2 so that r/2 stays in the class")
    half = scale_lambda(r, 0.5)
    lhs = seminorm(product(phi1, phi2), SeminormParams("r", r=r, K_max=K_max, W=W))
    a = seminorm(phi1, SeminormParams("r", r=half, K_max=K_max, W=W))
    b = seminorm(phi2, SeminormParams("r", r=half, K_max=K_max, W=W))
    rhs = a.value * b.value
    return {
        "lhs": lhs.value,
        "rhs": rhs,
        "holds": bool(lhs.value <= rhs * (1.0 + rel_slack)),
        "lhs_k": lhs.k,
        "factors": (a.value, b.value),
    }
