"""Globally adaptive tensor-product Gauss-Legendre quadrature on boxes."""

from __future__ import annotations

import heapq
import itertools
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

__all__ = ["QuadratureError", "integrate_box", "NODES_PER_AXIS"]

#: nodes per axis by dimension of the box
NODES_PER_AXIS = {1: 24, 2: 16, 3: 10, 4: 8}
MAX_POINTS = 4_000_000


class QuadratureError(ArithmeticError):
    def __init__(self, message: str, estimate: complex, error: float):
        super().__init__(f"{message} (estimate {estimate!r}, error {error:.3g})")
        self.estimate = estimate
        self.error = error


@lru_cache(maxsize=None)
def _rule(dim: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes in ``[0, 1]^dim`` and weights summing to 1."""
    xi, wi = np.polynomial.legendre.leggauss(n)
    xi = 0.5 * (xi + 1.0)
    wi = 0.5 * wi
    nodes = np.array(list(itertools.product(xi, repeat=dim)))
    weights = np.prod(np.array(list(itertools.product(wi, repeat=dim))), axis=1)
    return nodes, weights


def _children(box: np.ndarray) -> list[np.ndarray]:
    mid = box.mean(axis=1)
    halves = [((lo, m), (m, hi)) for (lo, hi), m in zip(box, mid)]
    return [np.array(c) for c in itertools.product(*halves)]


def integrate_box(
    f: Callable[[np.ndarray], np.ndarray],
    box,
    *,
    tol: float = 1e-10,
    rel_tol: float = 1e-12,
    n: int | None = None,
    max_points: int = MAX_POINTS,
    breaks: Sequence[Sequence[float]] | None = None,
    relative_to: str = "value",
) -> tuple[complex | float, float]:
    """Integrate ``f`` (vectorised on ``(m, dim)`` arrays) over ``box``.

    Each box is compared against the sum over its ``2^dim`` halves; the box
    with the largest discrepancy is split until the total discrepancy is
    below ``max(tol, rel_tol * |value|)``.  Optional ``breaks`` (interior
    breakpoints per axis) seed the initial partition, e.g. at the edges of
    the pieces on which ``f`` is smooth.  With ``relative_to="mass"`` the
    relative tolerance refers to the integral of ``|f|`` instead of the value,
    which is the attainable scale when large oscillating parts cancel.
    Returns ``(value, error_estimate)``.
    """
    if relative_to not in ("value", "mass"):
        raise ValueError("relative_to must be 'value' or 'mass'")
    box = np.atleast_2d(np.asarray(box, dtype=float))
    dim = box.shape[0]
    if np.any(box[:, 1] < box[:, 0]) or not np.all(np.isfinite(box)):
        raise ValueError("integration box must be finite with lo <= hi")
    if np.any(box[:, 1] == box[:, 0]):
        return 0.0, 0.0
    n = n or NODES_PER_AXIS.get(dim, 6)
    nodes, weights = _rule(dim, n)
    used = 0

    def rule(bs: list[np.ndarray]) -> tuple[list, list]:
        """Values and ``|f|`` masses on each box."""
        nonlocal used
        lo = np.array([b[:, 0] for b in bs])
        width = np.array([b[:, 1] - b[:, 0] for b in bs])
        pts = lo[:, None, :] + nodes[None, :, :] * width[:, None, :]
        vals = np.asarray(f(pts.reshape(-1, dim))).reshape(len(bs), -1)
        used += pts.shape[0] * pts.shape[1]
        vol = np.prod(width, axis=1)
        return list((vals @ weights) * vol), list((np.abs(vals) @ weights) * vol)

    heap: list = []
    counter = itertools.count()

    def push(b: np.ndarray, q) -> tuple:
        kids = _children(b)
        qs, ms = rule(kids)
        val = sum(qs)
        err = abs(q - val)
        heapq.heappush(heap, (-err, next(counter), b, kids, qs, ms))
        return val, err, sum(ms)

    cells = [box]
    if breaks is not None:
        axes = []
        for (lo, hi), br in zip(box, breaks):
            e = [lo, *sorted({float(b) for b in br if lo < b < hi}), hi]
            axes.append(list(zip(e[:-1], e[1:])))
        cells = [np.array(c) for c in itertools.product(*axes)]
    total, total_err, mass = 0.0, 0.0, 0.0
    for cell, q in zip(cells, rule(cells)[0]):
        v, e, m = push(cell, q)
        total += v
        total_err += e
        mass += m
    while total_err > max(tol, rel_tol * (mass if relative_to == "mass" else abs(total))):
        if used > max_points:
            raise QuadratureError("adaptive quadrature did not reach the tolerance", total, total_err)
        neg_err, _, b, kids, qs, ms = heapq.heappop(heap)
        total -= sum(qs)
        total_err += neg_err
        mass -= sum(ms)
        for kb, kq in zip(kids, qs):
            v, e, m = push(kb, kq)
            total += v
            total_err += e
            mass += m
    # recompute the sums exactly to avoid drift from incremental updates
    total = sum(sum(item[4]) for item in heap)
    total_err = sum(-item[0] for item in heap)
    if np.iscomplexobj(total) and np.imag(total) == 0:
        total = float(np.real(total))
    return total, float(total_err)
