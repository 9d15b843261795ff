"""Concretely represented ultradistributions and their pairings.

An :class:`Ultradistribution` is a finite sum of

* point terms ``c D^k delta_a`` with ``<D^k delta_a, phi> = (-1)^{|k|} (D^k phi)(a)``
  (equivalently ``i^{|k|} (d^k phi)(a)``),
* density terms: compactly supported function objects ``f`` acting by ``int f phi``,
* polynomial densities (unbounded support) acting by ``int p phi``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from ..bumpcalc.algebra import PolyFunction, TestFunction, product, reflect, scale
from ..quadrature import integrate_box

__all__ = [
    "DivergentPairingError",
    "PointTerm",
    "Ultradistribution",
    "delta",
    "density",
    "poly_density",
    "pair",
    "tensor_pair",
    "effective_box",
    "convolve_with_function",
    "TOL_Q",
]

#: absolute quadrature tolerance for pairings
TOL_Q = 1e-10
#: relative floor, only active for pairings with modulus above 1
REL_Q = 1e-10


class DivergentPairingError(ValueError):
    """The pairing integrand has no compact effective support."""


@dataclass(frozen=True, eq=False)
class PointTerm:
    coef: complex
    order: tuple[int, ...]
    at: np.ndarray

    def describe(self) -> dict[str, Any]:
        return {"coef": [float(np.real(self.coef)), float(np.imag(self.coef))], "order": list(self.order), "at": [float(v) for v in self.at]}


@dataclass(frozen=True, eq=False)
class Ultradistribution:
    dim: int
    points: tuple[PointTerm, ...] = ()
    densities: tuple[TestFunction, ...] = ()
    polys: tuple[PolyFunction, ...] = ()
    label: str = ""

    def __post_init__(self):
        for f in (*self.densities, *self.polys):
            if f.dim != self.dim:
                raise ValueError("term dimension does not match the distribution")
        for p in self.points:
            if len(p.order) != self.dim or p.at.size != self.dim:
                raise ValueError("point term dimension does not match the distribution")
        for f in self.densities:
            if not np.all(np.isfinite(f.bbox())):
                raise ValueError("density terms must have compact support; use polynomial terms otherwise")

    @property
    def is_compact(self) -> bool:
        return not self.polys

    def __add__(self, other: "Ultradistribution") -> "Ultradistribution":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return Ultradistribution(self.dim, self.points + other.points, self.densities + other.densities, self.polys + other.polys, self.label)

    def scaled(self, c) -> "Ultradistribution":
        return Ultradistribution(
            self.dim,
            tuple(PointTerm(p.coef * c, p.order, p.at) for p in self.points),
            tuple(scale(f, c) for f in self.densities),
            tuple(scale(p, c) for p in self.polys),
            self.label,
        )

    def reflected(self) -> "Ultradistribution":
        """``S-check`` with ``<S-check, phi> = <S, phi(-.)>``."""
        pts = tuple(PointTerm(p.coef * (-1) ** sum(p.order), p.order, -p.at) for p in self.points)
        polys = tuple(PolyFunction(p.dim, tuple((m, c * (-1) ** sum(m)) for m, c in p.coeffs)) for p in self.polys)
        return Ultradistribution(self.dim, pts, tuple(reflect(f) for f in self.densities), polys, self.label + "~")

    def multiplied(self, psi: TestFunction) -> "Ultradistribution":
        """``psi * S`` with ``<psi S, phi> = <S, psi phi>``.

        Point terms are redistributed by the Leibniz rule:
        ``psi c D^k delta_a = sum_j c C(k, j) (-1)^{|j|} (D^j psi)(a) D^{k-j} delta_a``.
        """
        pts = []
        for p in self.points:
            for j in itertools.product(*[range(v + 1) for v in p.order]):
                val = psi.partial(j)(p.at[None, :])[0]
                if val == 0:
                    continue
                c = p.coef * math.prod(math.comb(a, b) for a, b in zip(p.order, j)) * (1j) ** sum(j) * val
                if c != 0:
                    pts.append(PointTerm(complex(c), tuple(a - b for a, b in zip(p.order, j)), p.at))
        dens = [product(psi, f) for f in self.densities]
        dens += [product(psi, q) for q in self.polys]
        dens = [f for f in dens if not f.is_zero]
        if not np.all([np.all(np.isfinite(f.bbox())) for f in dens]):
            raise DivergentPairingError("multiplier does not make polynomial terms compactly supported")
        return Ultradistribution(self.dim, tuple(pts), tuple(dens), (), self.label)

    def describe(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "dim": self.dim,
            "points": [p.describe() for p in self.points],
            "densities": len(self.densities),
            "polys": [[[list(m), [float(np.real(c)), float(np.imag(c))]] for m, c in p.coeffs] for p in self.polys],
        }


def delta(at: Sequence[float] | float = 0.0, order: Sequence[int] | int | None = None, coef=1.0, label: str = "") -> Ultradistribution:
    a = np.atleast_1d(np.asarray(at, dtype=float))
    d = a.size
    if order is None:
        order = (0,) * d
    order = tuple(np.atleast_1d(order).astype(int).tolist())
    return Ultradistribution(d, (PointTerm(complex(coef), order, a),), label=label or "delta")


def density(f: TestFunction, label: str = "") -> Ultradistribution:
    return Ultradistribution(f.dim, densities=(f,), label=label or "density")


def poly_density(p: PolyFunction, label: str = "") -> Ultradistribution:
    return Ultradistribution(p.dim, polys=(p,), label=label or "poly")


def _clean(v):
    v = complex(v)
    return v.real if v.imag == 0 else v


def _integrate(fn, box: np.ndarray, tol: float, breaks=None):
    val, _ = integrate_box(fn, box, tol=tol, rel_tol=REL_Q, breaks=breaks, relative_to="mass")
    return val


def _edges(F: TestFunction) -> list[set]:
    """Per-axis edges of the smoothness pieces of ``F`` (empty if unknown)."""
    try:
        pieces = F.pieces()
    except ValueError:
        return [set() for _ in range(F.dim)]
    return [{float(v) for p in pieces for v in p[a] if np.isfinite(v)} for a in range(F.dim)]


def pair(T: Ultradistribution, phi: TestFunction, *, tol: float = TOL_Q):
    """``<T, phi>``."""
    if phi.dim != T.dim:
        raise ValueError("dimension mismatch")
    total = 0.0 + 0.0j
    for p in T.points:
        total += p.coef * (1j) ** sum(p.order) * phi.partial(p.order)(p.at[None, :])[0]
    pb = phi.bbox()
    for f in T.densities:
        box = np.stack([np.maximum(f.bbox()[:, 0], pb[:, 0]), np.minimum(f.bbox()[:, 1], pb[:, 1])], axis=1)
        if np.any(box[:, 1] <= box[:, 0]):
            continue
        total += _integrate(lambda x, f=f: f(x) * phi(x), box, tol, _edges(phi))
    for q in T.polys:
        if not np.all(np.isfinite(pb)):
            raise DivergentPairingError("polynomial density against a test function without compact support")
        total += _integrate(lambda x, q=q: q(x) * phi(x), pb, tol, _edges(phi))
    return _clean(total)


# ---------------------------------------------------------------------------
# tensor pairings <S (x) T, Phi>
# ---------------------------------------------------------------------------


def _sides(S: Ultradistribution):
    """Terms as ('pt', coef, order, at) or ('den', function, box)."""
    out = [("pt", p.coef, p.order, p.at) for p in S.points]
    out += [("den", f, f.bbox()) for f in S.densities]
    out += [("den", q, np.tile([-np.inf, np.inf], (S.dim, 1)).astype(float)) for q in S.polys]
    return out


def effective_box(Phi: TestFunction, box: np.ndarray) -> np.ndarray:
    """Shrink ``box`` using the support box of ``Phi`` and its ``x + y`` strips."""
    b = box.copy()
    pb = Phi.bbox()
    b[:, 0] = np.maximum(b[:, 0], pb[:, 0])
    b[:, 1] = np.minimum(b[:, 1], pb[:, 1])
    strips = Phi.strips()
    with np.errstate(invalid="ignore"):
        for _ in range(3):
            for s, sb in strips:
                x, y = b[:s], b[s:]
                xl = np.maximum(x[:, 0], sb[:, 0] - y[:, 1])
                xh = np.minimum(x[:, 1], sb[:, 1] - y[:, 0])
                yl = np.maximum(y[:, 0], sb[:, 0] - x[:, 1])
                yh = np.minimum(y[:, 1], sb[:, 1] - x[:, 0])
                b = np.concatenate([np.stack([xl, xh], 1), np.stack([yl, yh], 1)])
    return b


def tensor_pair(S: Ultradistribution, T: Ultradistribution, Phi: TestFunction, *, tol: float = TOL_Q):
    """``<S (x) T, Phi>`` for a function object ``Phi`` on ``R^d x R^d``."""
    d = S.dim
    if T.dim != d or Phi.dim != 2 * d:
        raise ValueError("dimension mismatch in tensor pairing")
    total = 0.0 + 0.0j
    for ls in _sides(S):
        for rs in _sides(T):
            kx = ls[2] if ls[0] == "pt" else (0,) * d
            ky = rs[2] if rs[0] == "pt" else (0,) * d
            F = Phi.partial(tuple(kx) + tuple(ky))
            if F.is_zero:
                continue
            coef = 1.0 + 0.0j
            box = np.zeros((2 * d, 2))
            if ls[0] == "pt":
                coef *= ls[1] * (1j) ** sum(kx)
                box[:d] = np.stack([ls[3], ls[3]], 1)
            else:
                box[:d] = ls[2]
            if rs[0] == "pt":
                coef *= rs[1] * (1j) ** sum(ky)
                box[d:] = np.stack([rs[3], rs[3]], 1)
            else:
                box[d:] = rs[2]
            free = np.array([ls[0] == "den"] * d + [rs[0] == "den"] * d)
            if not free.any():
                total += coef * F(box[:, 0][None, :])[0]
                continue
            eb = effective_box(F, box)
            if np.any(eb[:, 1] < eb[:, 0]) or np.any(eb[free, 1] == eb[free, 0]):
                continue
            if not np.all(np.isfinite(eb)):
                raise DivergentPairingError("effective support of the tensor pairing is not compact")
            fixed = eb[:, 0].copy()
            lw = ls[1] if ls[0] == "den" else None
            rw = rs[1] if rs[0] == "den" else None
            strip = [sb for s_, sb in F.strips() if s_ == d]
            if free.all() and strip:
                # integrate in (x, z = x + y) so that the strip becomes a coordinate box
                zb = np.stack([np.maximum(strip[0][:, 0], eb[:d, 0] + eb[d:, 0]), np.minimum(strip[0][:, 1], eb[:d, 1] + eb[d:, 1])], 1)
                if np.any(zb[:, 1] <= zb[:, 0]):
                    continue

                ed = _edges(F)
                ex = [a | b for a, b in zip(ed[:d], _edges(lw))]
                ey = [a | b for a, b in zip(ed[d:], _edges(rw))]
                # keep the side with more breakpoints as a coordinate; the
                # other side's edges become diagonal and are bracketed
                lead_y = sum(map(len, ey)) > sum(map(len, ex))

                def shear(w, F=F, lw=lw, rw=rw, lead_y=lead_y):
                    u, z = w[:, :d], w[:, d:]
                    x, y = (z - u, u) if lead_y else (u, z - u)
                    return F(np.concatenate([x, y], axis=1)) * lw(x) * rw(y)

                lead, other = (ey, ex) if lead_y else (ex, ey)
                ub = eb[d:] if lead_y else eb[:d]
                br = [lead[i] | {z - e for e in other[i] for z in zb[i]} for i in range(d)] + [set()] * d
                total += coef * _integrate(shear, np.concatenate([ub, zb]), tol / max(abs(coef), 1e-300), br)
                continue

            def integrand(z, F=F, lw=lw, rw=rw, fixed=fixed, free=free):
                pts = np.tile(fixed, (z.shape[0], 1))
                pts[:, free] = z
                v = F(pts)
                if lw is not None:
                    v = v * lw(pts[:, :d])
                if rw is not None:
                    v = v * rw(pts[:, d:])
                return v

            ed = _edges(F)
            if lw is not None:
                ed = [a | b for a, b in zip(ed, _edges(lw) + [set()] * d)]
            if rw is not None:
                ed = [a | b for a, b in zip(ed, [set()] * d + _edges(rw))]
            # absolute tolerance refers to the weighted contribution
            total += coef * _integrate(integrand, eb[free], tol / max(abs(coef), 1e-300), [ed[i] for i in np.nonzero(free)[0]])
    return _clean(total)


# ---------------------------------------------------------------------------
# convolution with a test function, x -> <S_y, phi(x - y)>
# ---------------------------------------------------------------------------


def convolve_with_function(S: Ultradistribution, phi: TestFunction, xs, *, panels: int = 64, nodes: int = 16) -> np.ndarray:
    """``(S * phi)(x) = <S_y, phi(x - y)>`` on 1-D points ``xs``.

    Densities and polynomial terms use a fixed composite Gauss-Legendre rule
    over the (bounded) range of integration, vectorised over ``xs``.
    """
    if S.dim != 1:
        raise NotImplementedError("pointwise convolution is implemented for d = 1")
    xs = np.asarray(xs, dtype=float).ravel()
    out = np.zeros(xs.size, dtype=complex)
    for p in S.points:
        k = p.order[0]
        # <c D^k delta_a, phi(x - .)> = c i^k (d/dy)^k phi(x - y)|_{y=a} = c (-i)^k phi^{(k)}(x - a)
        out += p.coef * (-1j) ** k * phi.partial((k,))((xs - p.at[0])[:, None])
    xi, wi = np.polynomial.legendre.leggauss(nodes)
    pb = phi.bbox()[0]

    def rule(lo, hi):
        edges = np.linspace(lo, hi, panels + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        t = (mid[:, None] + half[:, None] * xi[None, :]).ravel()
        w = (half[:, None] * wi[None, :]).ravel()
        return t, w

    for f in S.densities:
        lo, hi = f.bbox()[0]
        y, w = rule(lo, hi)
        fy = f(y[:, None]) * w
        vals = phi((xs[:, None] - y[None, :]).reshape(-1, 1)).reshape(xs.size, y.size)
        out += vals @ fy
    for q in S.polys:
        # substitute t = x - y so the range is the support of phi
        t, w = rule(pb[0], pb[1])
        pt = phi(t[:, None]) * w
        qv = q((xs[:, None] - t[None, :]).reshape(-1, 1)).reshape(xs.size, t.size)
        out += qv @ pt
    return out.real if not np.any(out.imag) else out
