"""Smooth plateaus: equal to 1 on an inner box, 0 outside the outer box.

The 1-D step ``S(t) = int_0^t beta / Z`` integrates the standard bump
``beta`` placed on ``[0, 1]``.  Only the order-0 values of the step need
quadrature (a fixed 64-node Gauss-Legendre rule); every derivative of a
plateau is an exact bump element supported in the margins.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .algebra import EPS_BOUNDARY, BumpElement, Tensor, TestFunction, Zero, make_bump_element, standard_atom

__all__ = ["STEP_NODES", "step", "Plateau1D", "plateau"]

STEP_NODES = 64


@lru_cache(maxsize=1)
def _rule() -> tuple[np.ndarray, np.ndarray, float]:
    xi, wi = np.polynomial.legendre.leggauss(STEP_NODES)
    beta = standard_atom(0.5, 0.5)
    # Z = 2 * int_0^{1/2} beta with the same rule, so that S(1/2) = 1/2 exactly
    Z = float(2.0 * 0.25 * np.sum(wi * beta(0.25 * (xi + 1.0))))
    return xi, wi, Z


def _beta01(s: np.ndarray) -> np.ndarray:
    """The standard bump on ``[0, 1]``, same cutoff as the atom evaluation."""
    w = 4.0 * s * (1.0 - s)
    out = np.zeros_like(w)
    mask = w > EPS_BOUNDARY
    out[mask] = np.exp(-1.0 / w[mask])
    return out


def step(t) -> np.ndarray:
    """Smooth step: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    xi, wi, Z = _rule()
    beta = _beta01
    out = np.where(t >= 1.0, 1.0, 0.0)
    mid = (t > 0.0) & (t < 1.0)
    if mid.any():
        tm = t[mid]
        # integrate over the shorter side and use S(t) + S(1 - t) = 1
        flip = tm > 0.5
        s = np.where(flip, 1.0 - tm, tm)
        nodes = 0.5 * np.multiply.outer(s, xi + 1.0)
        vals = 0.5 * s * (beta(nodes) @ wi) / Z
        out[mid] = np.where(flip, 1.0 - vals, vals)
    return out


@dataclass(frozen=True, eq=False)
class Plateau1D(TestFunction):
    """1 on ``[a, b]``, smooth step down to 0 on margins of width ``m``."""

    a: float = -1.0
    b: float = 1.0
    m: float = 1.0

    def __post_init__(self):
        if not (self.b >= self.a and self.m > 0):
            raise ValueError("plateau needs a <= b and a positive margin")

    def _eval(self, x):
        x = x[:, 0]
        out = np.zeros(x.shape[0])
        inner = (x >= self.a) & (x <= self.b)
        out[inner] = 1.0
        left = (x > self.a - self.m) & (x < self.a)
        if left.any():
            out[left] = step((x[left] - self.a + self.m) / self.m)
        right = (x > self.b) & (x < self.b + self.m)
        if right.any():
            out[right] = step((self.b + self.m - x[right]) / self.m)
        return out

    def derivative_element(self) -> BumpElement:
        Z = _rule()[2]
        h = self.m / 2.0
        up = standard_atom(self.a - h, h, 1.0 / (Z * self.m))
        down = standard_atom(self.b + h, h, -1.0 / (Z * self.m))
        return make_bump_element(1, [(up,), (down,)])

    def _partial(self, k):
        d1 = self.derivative_element()
        return d1 if k[0] == 1 else d1.partial((k[0] - 1,))

    def bbox(self):
        return np.array([[self.a - self.m, self.b + self.m]])

    def inner_box(self) -> np.ndarray:
        return np.array([[self.a, self.b]])

    def pieces(self):
        out = [np.array([[self.a - self.m, self.a]]), np.array([[self.b, self.b + self.m]])]
        if self.b > self.a:
            out.insert(1, np.array([[self.a, self.b]]))
        return out


def plateau(inner: Sequence[Sequence[float]], margin: float | Sequence[float] = 1.0) -> TestFunction:
    """Tensor plateau equal to 1 on the box ``inner`` (rows ``[lo, hi]``)."""
    inner = np.atleast_2d(np.asarray(inner, dtype=float))
    d = inner.shape[0]
    m = np.broadcast_to(np.asarray(margin, dtype=float), (d,))
    factors = tuple(Plateau1D(1, float(lo), float(hi), float(mi)) for (lo, hi), mi in zip(inner, m))
    if d == 1:
        return factors[0]
    return Tensor(d, factors)


def plateau_inner_box(f: TestFunction) -> np.ndarray | None:
    """Box on which a (tensor) plateau is identically 1, if known."""
    if isinstance(f, Plateau1D):
        return f.inner_box()
    if isinstance(f, Tensor) and all(isinstance(g, Plateau1D) for g in f.factors):
        return np.concatenate([g.inner_box() for g in f.factors], axis=0)
    if isinstance(f, Zero):
        return None
    return None


__all__.append("plateau_inner_box")
