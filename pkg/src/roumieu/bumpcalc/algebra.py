"""A closed differential algebra of compactly supported smooth functions.

One-dimensional atoms have the form

    f(x) = sum_{a in {0,1}, j} C[a, j] u^a w^{-j} exp(-e / w),
    u = (x - c) / rho,  w = 1 - u^2,

on ``|u| < 1`` and vanish outside.  Differentiation maps this family into
itself (``u^2`` is always rewritten as ``1 - w``), so derivatives of any order
are exact coefficient tables.  Keeping only the powers ``u^0`` and ``u^1``
avoids the cancellation that a plain power basis in ``u`` suffers near the
edge of the support at high order.

A :class:`BumpElement` is a finite sum of separable products of atoms.  Other
function objects (plateaus, dilations, products, ``phi(x + y)``) wrap these
and share the :class:`TestFunction` interface: vectorised evaluation on an
``(n, d)`` array, memoised real partial derivatives ``partial(k)``, and the
complex convention ``D(k) = (-i)^{|k|} partial(k)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "EPS_BOUNDARY",
    "COEF_GUARD",
    "TruncationOrderError",
    "Atom1D",
    "TestFunction",
    "BumpElement",
    "Zero",
    "Sum",
    "Product",
    "Tensor",
    "Dilated",
    "Translated",
    "Reflected",
    "DiagCompose",
    "PolyFunction",
    "bump",
    "product",
    "dilate",
    "translate",
    "reflect",
    "diag_compose",
    "differentiate",
    "evaluate",
    "as_points",
    "multi_indices",
]

#: points with 1 - u^2 below this value evaluate to 0 (exp(-1e4) underflows)
EPS_BOUNDARY = 1e-4
#: coefficient magnitude beyond which differentiation refuses to continue
COEF_GUARD = 1e250


class TruncationOrderError(ArithmeticError):
    """Raised when derivative coefficients leave the representable range."""


def as_points(x, dim: int) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1) if dim == 1 else arr.reshape(1, -1)
    if arr.shape[1] != dim:
        raise ValueError(f"expected points of dimension {dim}, got shape {arr.shape}")
    return arr


def multi_indices(d: int, max_order: int, *, min_order: int = 0) -> list[tuple[int, ...]]:
    """All multi-indices with ``min_order <= |k| <= max_order``, ordered by |k|."""
    out = []
    for n in range(min_order, max_order + 1):
        for k in itertools.product(range(n + 1), repeat=d):
            if sum(k) == n:
                out.append(tuple(k))
    return out


def _check_k(k: Sequence[int], dim: int) -> tuple[int, ...]:
    k = tuple(int(v) for v in k)
    if len(k) != dim or any(v < 0 for v in k):
        raise ValueError(f"invalid multi-index {k} for dimension {dim}")
    return k


def _trim(C: np.ndarray, jlo: int) -> tuple[np.ndarray, int]:
    nz = np.nonzero(np.any(C != 0, axis=0))[0]
    if nz.size == 0:
        return np.zeros((2, 1), dtype=C.dtype), 0
    return C[:, nz[0] : nz[-1] + 1], jlo + int(nz[0])


# ---------------------------------------------------------------------------
# one-dimensional atoms
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Atom1D:
    center: float
    radius: float
    C: np.ndarray
    jlo: int = 0
    e: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("atom radius must be positive")
        C = np.array(self.C)
        if C.ndim != 2 or C.shape[0] != 2:
            raise ValueError("atom coefficients must have shape (2, J)")
        if not np.iscomplexobj(C):
            C = C.astype(float)
        C.setflags(write=False)
        object.__setattr__(self, "C", C)

    @property
    def exponents(self) -> np.ndarray:
        return self.jlo + np.arange(self.C.shape[1])

    @property
    def max_boundary_power(self) -> int:
        return int(self.exponents[-1])

    @property
    def is_zero(self) -> bool:
        return not np.any(self.C)

    def interval(self) -> tuple[float, float]:
        return self.center - self.radius, self.center + self.radius

    def same_geometry(self, other: "Atom1D") -> bool:
        return self.center == other.center and self.radius == other.radius and self.e == other.e

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        u = (x - self.center) / self.radius
        w = 1.0 - u * u
        mask = w > EPS_BOUNDARY
        dtype = np.result_type(self.C.dtype, float)
        out = np.zeros(x.shape, dtype=dtype)
        if mask.any():
            um, wm = u[mask], w[mask]
            E = np.exp(-np.multiply.outer(np.log(wm), self.exponents) - (self.e / wm)[:, None])
            out[mask] = E @ self.C[0] + um * (E @ self.C[1])
        return out

    def scaled(self, c) -> "Atom1D":
        return Atom1D(self.center, self.radius, self.C * c, self.jlo, self.e)

    def derivative(self) -> "Atom1D":
        """Exact ``d/dx`` of the atom."""
        C = self.C
        J = C.shape[1]
        m = self.exponents.astype(float)
        jlo = self.jlo - 1
        D = np.zeros((2, J + 3), dtype=C.dtype)
        idx = np.arange(J) + 1  # column of exponent m in the new table
        # u^0 w^-m  ->  2m u w^-(m+1) - 2e u w^-(m+2)
        D[1, idx + 1] += 2.0 * m * C[0]
        D[1, idx + 2] += -2.0 * self.e * C[0]
        # u^1 w^-m  ->  w^-m + (2m u^2) w^-(m+1) - (2e u^2) w^-(m+2),  u^2 w^-q = w^-q - w^-(q-1)
        D[0, idx] += C[1]
        D[0, idx + 1] += 2.0 * m * C[1]
        D[0, idx] += -2.0 * m * C[1]
        D[0, idx + 2] += -2.0 * self.e * C[1]
        D[0, idx + 1] += 2.0 * self.e * C[1]
        D = D / self.radius
        D, jlo = _trim(D, jlo)
        if np.max(np.abs(D)) > COEF_GUARD:
            raise TruncationOrderError("derivative coefficients overflow; use a smaller derivative order")
        return Atom1D(self.center, self.radius, D, jlo, self.e)

    def times(self, other: "Atom1D") -> "Atom1D":
        """Exact product of two atoms on the same interval."""
        if self.center != other.center or self.radius != other.radius:
            raise ValueError("atoms must share center and radius to multiply exactly")
        A, B = self.C, other.C
        J = A.shape[1] + B.shape[1] - 1
        dtype = np.result_type(A.dtype, B.dtype)
        P = np.zeros((2, J + 1), dtype=dtype)  # one spare column for the u^2 reduction
        jlo = self.jlo + other.jlo - 1
        P[0, 1 : J + 1] += np.convolve(A[0], B[0])
        P[1, 1 : J + 1] += np.convolve(A[0], B[1]) + np.convolve(A[1], B[0])
        uu = np.convolve(A[1], B[1])  # u^2 w^-m = w^-m - w^-(m-1)
        P[0, 1 : J + 1] += uu
        P[0, 0:J] -= uu
        P, jlo = _trim(P, jlo)
        return Atom1D(self.center, self.radius, P, jlo, self.e + other.e)

    def add(self, other: "Atom1D") -> "Atom1D":
        if not self.same_geometry(other):
            raise ValueError("atoms must share geometry to add")
        lo = min(self.jlo, other.jlo)
        hi = max(self.jlo + self.C.shape[1], other.jlo + other.C.shape[1])
        dtype = np.result_type(self.C.dtype, other.C.dtype)
        S = np.zeros((2, hi - lo), dtype=dtype)
        S[:, self.jlo - lo : self.jlo - lo + self.C.shape[1]] += self.C
        S[:, other.jlo - lo : other.jlo - lo + other.C.shape[1]] += other.C
        S, jlo = _trim(S, lo)
        return Atom1D(self.center, self.radius, S, jlo, self.e)

    def affine(self, scale: float, shift: float) -> "Atom1D":
        """The atom composed with ``x -> (x - shift) / scale`` (scale may be negative)."""
        C = self.C
        if scale < 0:
            C = C * np.array([[1.0], [-1.0]])
        return Atom1D(self.center * scale + shift, self.radius * abs(scale), C, self.jlo, self.e)


def standard_atom(center: float = 0.0, radius: float = 1.0, coef=1.0) -> Atom1D:
    return Atom1D(float(center), float(radius), np.array([[coef], [0.0 * coef]]), 0, 1.0)


# ---------------------------------------------------------------------------
# function objects
# ---------------------------------------------------------------------------


def _full_box(dim: int) -> np.ndarray:
    return np.tile(np.array([-np.inf, np.inf]), (dim, 1))


def _intersect(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.stack([np.maximum(a[:, 0], b[:, 0]), np.minimum(a[:, 1], b[:, 1])], axis=1)


def _box_empty(b: np.ndarray) -> bool:
    return bool(np.any(b[:, 1] <= b[:, 0]))


@dataclass(frozen=True, eq=False)
class TestFunction:
    """Common interface of all function objects."""

    __test__ = False  # not a pytest class

    dim: int
    _partials: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    # -- evaluation -----------------------------------------------------
    def __call__(self, x) -> np.ndarray:
        return self._eval(as_points(x, self.dim))

    def _eval(self, x: np.ndarray) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    # -- derivatives ----------------------------------------------------
    def partial(self, k: Sequence[int]) -> "TestFunction":
        """Real partial derivative ``d^k``, memoised per multi-index."""
        k = _check_k(k, self.dim)
        if not any(k):
            return self
        hit = self._partials.get(k)
        if hit is None:
            hit = self._partial(k)
            self._partials[k] = hit
        return hit

    def _partial(self, k: tuple[int, ...]) -> "TestFunction":  # pragma: no cover - abstract
        raise NotImplementedError

    def D(self, k: Sequence[int]) -> "TestFunction":
        """``D^k = (-i)^{|k|} d^k``."""
        k = _check_k(k, self.dim)
        n = sum(k)
        f = self.partial(k)
        return f if n % 4 == 0 else Sum(self.dim, (f,), (complex((-1j) ** n),))

    # -- geometry -------------------------------------------------------
    def bbox(self) -> np.ndarray:
        """Closed box containing the support, ``+-inf`` where unbounded."""
        return _full_box(self.dim)

    def strips(self) -> tuple[tuple[int, np.ndarray], ...]:
        """Constraints ``x + y in box`` for a split ``(x, y) = (z[:s], z[s:])``."""
        return ()

    def pieces(self) -> list[np.ndarray]:
        """Boxes covering the support on which the function is sampled for sups."""
        b = self.bbox()
        if not np.all(np.isfinite(b)):
            raise ValueError(f"{type(self).__name__} has unbounded support; no sampling pieces")
        return [b]

    @property
    def is_zero(self) -> bool:
        return False

    # -- arithmetic -----------------------------------------------------
    def __add__(self, other: "TestFunction") -> "TestFunction":
        return add(self, other)

    def __sub__(self, other: "TestFunction") -> "TestFunction":
        return add(self, other, 1.0, -1.0)

    def __mul__(self, c) -> "TestFunction":
        if isinstance(c, TestFunction):
            return product(self, c)
        return scale(self, c)

    __rmul__ = __mul__

    def __neg__(self) -> "TestFunction":
        return scale(self, -1.0)


@dataclass(frozen=True, eq=False)
class Zero(TestFunction):
    def _eval(self, x):
        return np.zeros(x.shape[0])

    def _partial(self, k):
        return self

    def bbox(self):
        return np.zeros((self.dim, 2))

    def pieces(self):
        return []

    @property
    def is_zero(self) -> bool:
        return True


@dataclass(frozen=True, eq=False)
class BumpElement(TestFunction):
    """Finite sum of separable products of atoms (one atom per axis)."""

    terms: tuple[tuple[Atom1D, ...], ...] = ()

    def __post_init__(self):
        for t in self.terms:
            if len(t) != self.dim:
                raise ValueError("each term needs one atom per axis")

    def _eval(self, x):
        dtype = np.result_type(float, *[a.C.dtype for t in self.terms for a in t]) if self.terms else float
        out = np.zeros(x.shape[0], dtype=dtype)
        for t in self.terms:
            inside = np.ones(x.shape[0], dtype=bool)
            for i, a in enumerate(t):
                lo, hi = a.interval()
                inside &= (x[:, i] > lo) & (x[:, i] < hi)
            if not inside.any():
                continue
            xi = x[inside]
            val = t[0](xi[:, 0])
            for i in range(1, self.dim):
                val = val * t[i](xi[:, i])
            out[inside] += val
        return out

    def _partial(self, k):
        # reuse the memo: differentiate one step beyond the previous multi-index
        i = max(j for j, v in enumerate(k) if v)
        prev = list(k)
        prev[i] -= 1
        base = self.partial(prev)
        if base.is_zero:
            return base
        terms = []
        for t in base.terms:
            a = t[i].derivative()
            if not a.is_zero:
                terms.append(t[:i] + (a,) + t[i + 1 :])
        return make_bump_element(self.dim, terms)

    @property
    def is_zero(self) -> bool:
        return len(self.terms) == 0

    def bbox(self):
        if not self.terms:
            return np.zeros((self.dim, 2))
        b = np.array([[a.interval() for a in t] for t in self.terms])
        return np.stack([b[:, :, 0].min(axis=0), b[:, :, 1].max(axis=0)], axis=1)

    def pieces(self):
        seen = {}
        for t in self.terms:
            key = tuple(a.interval() for a in t)
            seen.setdefault(key, np.array(key, dtype=float))
        return list(seen.values())

    def max_boundary_power(self) -> int:
        return max((a.max_boundary_power for t in self.terms for a in t), default=0)


def _canonical_terms(dim: int, terms: Iterable[tuple[Atom1D, ...]]) -> list[tuple[Atom1D, ...]]:
    """Merge terms that differ only in one axis, so sums stay compact in 1-D."""
    out: list[tuple[Atom1D, ...]] = []
    for t in terms:
        if any(a.is_zero for a in t):
            continue
        merged = False
        if dim == 1:
            for n, s in enumerate(out):
                if s[0].same_geometry(t[0]):
                    out[n] = (s[0].add(t[0]),)
                    merged = True
                    break
        if not merged:
            out.append(tuple(t))
    return [t for t in out if not any(a.is_zero for a in t)]


def make_bump_element(dim: int, terms: Iterable[tuple[Atom1D, ...]]) -> BumpElement:
    return BumpElement(dim, tuple(_canonical_terms(dim, terms)))


def bump(center: Sequence[float] | float = 0.0, radius: Sequence[float] | float = 1.0, coef=1.0) -> BumpElement:
    """Separable standard bump ``coef * prod_i exp(-1/(1 - u_i^2))``."""
    c = np.atleast_1d(np.asarray(center, dtype=float))
    r = np.atleast_1d(np.asarray(radius, dtype=float))
    if r.size == 1 and c.size > 1:
        r = np.full(c.size, r[0])
    if c.size != r.size:
        raise ValueError("center and radius must have the same dimension")
    atoms = [standard_atom(c[0], r[0], coef)] + [standard_atom(ci, ri) for ci, ri in zip(c[1:], r[1:])]
    return BumpElement(c.size, (tuple(atoms),))


@dataclass(frozen=True, eq=False)
class Sum(TestFunction):
    children: tuple[TestFunction, ...] = ()
    coefs: tuple[complex, ...] = ()

    def _eval(self, x):
        vals = [c * f._eval(x) for f, c in zip(self.children, self.coefs)]
        if not vals:
            return np.zeros(x.shape[0])
        out = vals[0]
        for v in vals[1:]:
            out = out + v
        if np.iscomplexobj(out) and not np.any(np.imag(self.coefs)) and all(not np.iscomplexobj(v) for v in vals):
            out = out.real
        return out

    def _partial(self, k):
        parts = [(f.partial(k), c) for f, c in zip(self.children, self.coefs)]
        return add_many(self.dim, [p for p, _ in parts], [c for _, c in parts])

    @property
    def is_zero(self) -> bool:
        return all(f.is_zero for f in self.children)

    def bbox(self):
        boxes = [f.bbox() for f in self.children if not f.is_zero]
        if not boxes:
            return np.zeros((self.dim, 2))
        b = np.array(boxes)
        return np.stack([b[:, :, 0].min(axis=0), b[:, :, 1].max(axis=0)], axis=1)

    def strips(self):
        kids = [f for f in self.children if not f.is_zero]
        if not kids:
            return ()
        first = kids[0].strips()
        if not first:
            return ()
        out = []
        for s, box in first:
            hull = box.copy()
            for f in kids[1:]:
                match = [b for t, b in f.strips() if t == s]
                if not match:
                    break
                hull = np.stack([np.minimum(hull[:, 0], match[0][:, 0]), np.maximum(hull[:, 1], match[0][:, 1])], axis=1)
            else:
                out.append((s, hull))
        return tuple(out)

    def pieces(self):
        out = []
        for f in self.children:
            out.extend(f.pieces())
        return _dedupe(out)


def _dedupe(boxes: list[np.ndarray]) -> list[np.ndarray]:
    seen = {}
    for b in boxes:
        seen.setdefault(tuple(map(tuple, np.round(b, 14))), b)
    return list(seen.values())


def scale(f: TestFunction, c) -> TestFunction:
    if f.is_zero or c == 0:
        return Zero(f.dim)
    if isinstance(f, BumpElement):
        return BumpElement(f.dim, tuple((t[0].scaled(c),) + t[1:] for t in f.terms))
    return Sum(f.dim, (f,), (c,))


def add_many(dim: int, fs: Sequence[TestFunction], cs: Sequence) -> TestFunction:
    pairs = [(f, c) for f, c in zip(fs, cs) if not f.is_zero and c != 0]
    if not pairs:
        return Zero(dim)
    if all(isinstance(f, BumpElement) for f, _ in pairs):
        terms = []
        for f, c in pairs:
            terms.extend((t[0].scaled(c),) + t[1:] for t in f.terms)
        return make_bump_element(dim, terms)
    if len(pairs) == 1 and pairs[0][1] == 1:
        return pairs[0][0]
    return Sum(dim, tuple(f for f, _ in pairs), tuple(c for _, c in pairs))


def add(f: TestFunction, g: TestFunction, a=1.0, b=1.0) -> TestFunction:
    if f.dim != g.dim:
        raise ValueError("dimension mismatch")
    return add_many(f.dim, [f, g], [a, b])


@dataclass(frozen=True, eq=False)
class Product(TestFunction):
    """Pointwise product differentiated by the Leibniz rule."""

    f: TestFunction = None
    g: TestFunction = None

    def _eval(self, x):
        out = self.f._eval(x)
        nz = out != 0
        res = np.zeros(x.shape[0], dtype=np.result_type(out.dtype, float))
        if nz.any():
            gv = self.g._eval(x[nz])
            res = res.astype(np.result_type(res.dtype, gv.dtype))
            res[nz] = out[nz] * gv
        return res

    def _partial(self, k):
        fs, cs = [], []
        for j in itertools.product(*[range(v + 1) for v in k]):
            fj = self.f.partial(j)
            if fj.is_zero:
                continue
            rest = tuple(a - b for a, b in zip(k, j))
            gj = self.g.partial(rest)
            if gj.is_zero:
                continue
            c = math.prod(math.comb(a, b) for a, b in zip(k, j))
            fs.append(product(fj, gj))
            cs.append(float(c))
        return add_many(self.dim, fs, cs)

    def bbox(self):
        return _intersect(self.f.bbox(), self.g.bbox())

    def strips(self):
        return tuple(self.f.strips()) + tuple(self.g.strips())

    def pieces(self):
        out = []
        bb = self.bbox()
        fp = self.f.pieces() if np.all(np.isfinite(self.f.bbox())) else [bb]
        gp = self.g.pieces() if np.all(np.isfinite(self.g.bbox())) else [bb]
        for a in fp:
            for b in gp:
                c = _intersect(a, b)
                if not _box_empty(c):
                    out.append(c)
        return _dedupe(out)


def product(f: TestFunction, g: TestFunction) -> TestFunction:
    """Exact product when both factors are aligned bump elements, otherwise a wrapper."""
    if f.dim != g.dim:
        raise ValueError("dimension mismatch")
    if f.is_zero or g.is_zero:
        return Zero(f.dim)
    if _box_empty(_intersect(f.bbox(), g.bbox())):
        return Zero(f.dim)
    if isinstance(f, BumpElement) and isinstance(g, BumpElement):
        terms = []
        ok = True
        for s in f.terms:
            for t in g.terms:
                disjoint = any(a.interval()[1] <= b.interval()[0] or b.interval()[1] <= a.interval()[0] for a, b in zip(s, t))
                if disjoint:
                    continue
                if all(a.center == b.center and a.radius == b.radius for a, b in zip(s, t)):
                    terms.append(tuple(a.times(b) for a, b in zip(s, t)))
                else:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return make_bump_element(f.dim, terms)
    return Product(f.dim, f, g)


@dataclass(frozen=True, eq=False)
class Tensor(TestFunction):
    """``(z_1, ..., z_m) -> prod_i f_i(z_i)`` over consecutive coordinate blocks."""

    factors: tuple[TestFunction, ...] = ()

    def __post_init__(self):
        if sum(f.dim for f in self.factors) != self.dim:
            raise ValueError("tensor factor dimensions must add up to dim")

    def _split(self, seq):
        out, i = [], 0
        for f in self.factors:
            out.append(seq[i : i + f.dim])
            i += f.dim
        return out

    def _eval(self, x):
        out = None
        i = 0
        for f in self.factors:
            v = f._eval(x[:, i : i + f.dim])
            out = v if out is None else out * v
            i += f.dim
        return out

    def _partial(self, k):
        parts = [f.partial(kk) for f, kk in zip(self.factors, self._split(k))]
        if any(p.is_zero for p in parts):
            return Zero(self.dim)
        return Tensor(self.dim, tuple(parts))

    @property
    def is_zero(self) -> bool:
        return any(f.is_zero for f in self.factors)

    def bbox(self):
        return np.concatenate([f.bbox() for f in self.factors], axis=0)

    def pieces(self):
        out = []
        for combo in itertools.product(*[f.pieces() for f in self.factors]):
            out.append(np.concatenate(combo, axis=0))
        return out


@dataclass(frozen=True, eq=False)
class Dilated(TestFunction):
    """``x -> f(x / a)`` for a scalar ``a > 0``."""

    f: TestFunction = None
    a: float = 1.0

    def _eval(self, x):
        return self.f._eval(x / self.a)

    def _partial(self, k):
        inner = self.f.partial(k)
        if inner.is_zero:
            return Zero(self.dim)
        return scale(dilate(inner, self.a), self.a ** (-sum(k)))

    @property
    def is_zero(self) -> bool:
        return self.f.is_zero

    def bbox(self):
        return self.f.bbox() * self.a

    def strips(self):
        return tuple((s, b * self.a) for s, b in self.f.strips())

    def pieces(self):
        return [p * self.a for p in self.f.pieces()]


def dilate(f: TestFunction, a: float) -> TestFunction:
    """``x -> f(x / a)``; exact on bump elements."""
    if not a > 0:
        raise ValueError("dilation factor must be positive")
    if isinstance(f, BumpElement):
        return BumpElement(f.dim, tuple(tuple(at.affine(a, 0.0) for at in t) for t in f.terms))
    if isinstance(f, Dilated):
        return Dilated(f.dim, f.f, f.a * a)
    if isinstance(f, Zero):
        return f
    return Dilated(f.dim, f, float(a))


@dataclass(frozen=True, eq=False)
class Translated(TestFunction):
    """``x -> f(x + shift)``."""

    f: TestFunction = None
    shift: np.ndarray = None

    def _eval(self, x):
        return self.f._eval(x + self.shift)

    def _partial(self, k):
        return translate(self.f.partial(k), self.shift)

    @property
    def is_zero(self) -> bool:
        return self.f.is_zero

    def bbox(self):
        return self.f.bbox() - self.shift[:, None]

    def pieces(self):
        return [p - self.shift[:, None] for p in self.f.pieces()]


def translate(f: TestFunction, shift) -> TestFunction:
    """``x -> f(x + shift)``; exact on bump elements."""
    s = np.atleast_1d(np.asarray(shift, dtype=float))
    if f.is_zero:
        return Zero(f.dim)
    if isinstance(f, BumpElement):
        return BumpElement(f.dim, tuple(tuple(at.affine(1.0, -si) for at, si in zip(t, s)) for t in f.terms))
    return Translated(f.dim, f, s)


@dataclass(frozen=True, eq=False)
class Reflected(TestFunction):
    """``x -> f(-x)``."""

    f: TestFunction = None

    def _eval(self, x):
        return self.f._eval(-x)

    def _partial(self, k):
        return scale(reflect(self.f.partial(k)), (-1.0) ** sum(k))

    @property
    def is_zero(self) -> bool:
        return self.f.is_zero

    def bbox(self):
        return -self.f.bbox()[:, ::-1]

    def pieces(self):
        return [-p[:, ::-1] for p in self.f.pieces()]


def reflect(f: TestFunction) -> TestFunction:
    if f.is_zero:
        return Zero(f.dim)
    if isinstance(f, BumpElement):
        return BumpElement(f.dim, tuple(tuple(at.affine(-1.0, 0.0) for at in t) for t in f.terms))
    return Reflected(f.dim, f)


@dataclass(frozen=True, eq=False)
class DiagCompose(TestFunction):
    """``(x, y) -> f(x + y)`` on ``R^d x R^d``."""

    f: TestFunction = None

    def _eval(self, x):
        d = self.f.dim
        return self.f._eval(x[:, :d] + x[:, d:])

    def _partial(self, k):
        d = self.f.dim
        inner = self.f.partial(tuple(a + b for a, b in zip(k[:d], k[d:])))
        if inner.is_zero:
            return Zero(self.dim)
        return DiagCompose(self.dim, inner)

    @property
    def is_zero(self) -> bool:
        return self.f.is_zero

    def strips(self):
        return ((self.f.dim, self.f.bbox()),)


def diag_compose(f: TestFunction) -> DiagCompose:
    return DiagCompose(2 * f.dim, f)


@dataclass(frozen=True, eq=False)
class PolyFunction(TestFunction):
    """Polynomial ``sum_m c_m x^m`` (unbounded support)."""

    coeffs: tuple[tuple[tuple[int, ...], complex], ...] = ()

    def _eval(self, x):
        out = np.zeros(x.shape[0], dtype=complex if any(isinstance(c, complex) for _, c in self.coeffs) else float)
        for m, c in self.coeffs:
            term = np.full(x.shape[0], c)
            for i, mi in enumerate(m):
                if mi:
                    term = term * x[:, i] ** mi
            out = out + term
        return out

    def _partial(self, k):
        out = []
        for m, c in self.coeffs:
            if any(mi < ki for mi, ki in zip(m, k)):
                continue
            f = math.prod(math.perm(mi, ki) for mi, ki in zip(m, k))
            out.append((tuple(mi - ki for mi, ki in zip(m, k)), c * f))
        if not out:
            return Zero(self.dim)
        return PolyFunction(self.dim, tuple(out))

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for _, c in self.coeffs)


def poly(coeffs: Sequence, dim: int = 1) -> PolyFunction:
    """Polynomial from a coefficient list (1-D, ascending powers) or ``{exponent: coef}``."""
    if isinstance(coeffs, dict):
        items = tuple((tuple(m), c) for m, c in coeffs.items())
    else:
        if dim != 1:
            raise ValueError("coefficient lists describe 1-D polynomials")
        items = tuple(((i,), c) for i, c in enumerate(coeffs) if c != 0)
    return PolyFunction(dim, items)


__all__.append("poly")


def differentiate(f: TestFunction, k: Sequence[int], *, complex_convention: bool = True) -> TestFunction:
    """``D^k f`` (``(-i)^{|k|} d^k``) or the real ``d^k f``."""
    return f.D(k) if complex_convention else f.partial(k)


def evaluate(f: TestFunction, x) -> np.ndarray:
    return f(x)
