"""Ultradifferential operators ``P(D) = sum_k c_k D^k`` of Roumieu class.

Operators are stored truncated at order ``K_op``.  A coefficient rule may be
attached so that the decay certificate and the truncation budget can look
past ``K_op``.  ``D = -i d`` throughout; for even-order operators with real
coefficients every ``D^k`` with ``|k|`` even is real, so values stay real.

The exchange identity is checked leg by leg with the sequential convolution
engine.  The correction ``nu_n`` arising when ``P(-D_x)`` is moved past a
unit member is assembled from its regrouped series and compared with the
direct Leibniz expansion; the inequalities used to bound it are checked on
index tuples.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .bumpcalc.algebra import Dilated, Tensor, TestFunction, Zero, add_many, diag_compose, dilate, multi_indices, product
from .bumpcalc.plateau import plateau
from .bumpcalc.seminorms import SeminormParams, seminorm, sup_table
from .bumpcalc.units import ApproximateUnit
from .komatsu import DecayCertificate, classify_decay
from .quadrature import integrate_box
from .rclass import RSequence, check_pp_inequality, elementwise_min, pp_minorant, product_sequence, scale_lambda, shift_rsequence
from .ultradist.convolution import TOL_AGREE, convolve, support_box
from .ultradist.distribution import PointTerm, Ultradistribution, pair, tensor_pair
from .weights import REL_TOL, WeightSequence, check_condition, make_weight_sequence

__all__ = [
    "NotOfClassError",
    "UnsupportedCombinationError",
    "ConvolvabilityError",
    "OperatorCertificate",
    "UltradiffOperator",
    "make_operator",
    "operator_from_config",
    "certify_class",
    "apply_to_function",
    "apply_to_distribution",
    "check_duality",
    "truncation_budget",
    "exchange_check",
    "nu_correction",
    "nu_direct",
    "check_nu_identity",
    "nu_sup_table",
    "nu_pairings",
    "nu_bound_check",
    "K_OP_DEFAULT",
]

K_OP_DEFAULT = 24
#: certification prefix length when a coefficient rule is attached
CERT_LENGTH = 64
#: orders past K_op summed explicitly in the truncation budget
BUDGET_ORDERS = 16
#: inflation of supp phi for the cutoff theta
THETA_INFLATE = 0.1
NU_IDENTITY_TOL = 1e-9
INEQ_ORDER = 12
#: prefix length for the auxiliary sequences of the nu_n bounds
NU_PREFIX = 1024


class NotOfClassError(ValueError):
    """Coefficients do not decay fast enough for the class."""


class UnsupportedCombinationError(ValueError):
    pass


class ConvolvabilityError(ArithmeticError):
    def __init__(self, leg: str, failures: Sequence[str]):
        super().__init__(f"leg {leg} is not convolvable: {'; '.join(failures)}")
        self.leg = leg
        self.failures = tuple(failures)


@dataclass(frozen=True)
class OperatorCertificate:
    """``|c_k| <= C / (U_{|k|} M_k)`` verified on the stored range."""

    C: float
    u: RSequence
    decay: DecayCertificate | None
    checked_orders: int
    max_ratio: float

    def to_dict(self) -> dict[str, Any]:
        return {"C": self.C, "u_family": self.u.family, "checked_orders": self.checked_orders, "max_ratio": self.max_ratio}


@dataclass(frozen=True, eq=False)
class UltradiffOperator:
    dim: int
    coefficients: Mapping[tuple[int, ...], complex]
    K_op: int = K_OP_DEFAULT
    rule: Callable[[tuple[int, ...]], complex] | None = None
    name: str = ""
    certificate: OperatorCertificate | None = None
    W: WeightSequence | None = None

    def __post_init__(self):
        if self.K_op < 2:
            raise ValueError("K_op must be at least 2")
        coefs = {}
        for k, c in self.coefficients.items():
            k = tuple(int(v) for v in k)
            if len(k) != self.dim or any(v < 0 for v in k):
                raise ValueError(f"bad multi-index {k}")
            if sum(k) > self.K_op:
                raise ValueError(f"coefficient of order {sum(k)} beyond K_op = {self.K_op}")
            if c != 0:
                coefs[k] = complex(c)
        object.__setattr__(self, "coefficients", coefs)

    @property
    def order(self) -> int:
        return max((sum(k) for k in self.coefficients), default=0)

    @property
    def finite_order(self) -> bool:
        return self.rule is None

    def coef(self, k: Sequence[int]) -> complex:
        k = tuple(k)
        if sum(k) <= self.K_op:
            return self.coefficients.get(k, 0.0)
        return complex(self.rule(k)) if self.rule is not None else 0.0

    def adjoint_coef(self, k: Sequence[int]) -> complex:
        """Coefficient of ``D^k`` in ``P(-D)``."""
        return (-1) ** sum(k) * self.coef(k)

    def describe(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "dim": self.dim,
            "K_op": self.K_op,
            "finite_order": self.finite_order,
            "coefficients": [[list(k), [c.real, c.imag]] for k, c in sorted(self.coefficients.items())],
            "certificate": None if self.certificate is None else self.certificate.to_dict(),
        }


def _inv_fact_weight(W: WeightSequence, dim: int) -> Callable[[tuple[int, ...]], complex]:
    def rule(k):
        n = sum(k)
        if n > W.N:
            raise IndexError(f"order {n} beyond the weight prefix")
        return math.exp(-math.lgamma(n + 1) - W.log_values[n]) if dim == 1 else math.exp(-sum(math.lgamma(v + 1) for v in k) - W.log_values[n])

    return rule


def make_operator(
    coefficients: Mapping[Sequence[int], complex] | None = None,
    *,
    dim: int = 1,
    K_op: int | None = None,
    coef_rule: str | None = None,
    W: WeightSequence | None = None,
    name: str = "",
) -> UltradiffOperator:
    """Explicit coefficient table or a named rule (``inv_fact_weight``: ``c_k = 1/(k! M_k)``).

    With ``W`` given the operator is certified right away.
    """
    if coef_rule is not None:
        if coef_rule != "inv_fact_weight":
            raise ValueError(f"unknown coefficient rule {coef_rule!r}")
        if W is None:
            raise ValueError("the inv_fact_weight rule needs a weight sequence")
        K_op = K_op or K_OP_DEFAULT
        rule = _inv_fact_weight(W, dim)
        coefs = {k: rule(k) for k in multi_indices(dim, K_op)}
        P = UltradiffOperator(dim, coefs, K_op, rule, name or coef_rule, W=W)
    else:
        coefs = {tuple(np.atleast_1d(k).astype(int).tolist()): c for k, c in (coefficients or {}).items()}
        order = max((sum(k) for k in coefs), default=0)
        P = UltradiffOperator(dim, coefs, K_op or max(2, order), None, name, W=W)
    return certify_class(P, W) if W is not None else P


def operator_from_config(cfg: dict[str, Any], W: WeightSequence, dim: int = 1) -> UltradiffOperator:
    if "coef_rule" in cfg:
        return make_operator(dim=dim, K_op=cfg.get("K_op"), coef_rule=cfg["coef_rule"], W=W, name=cfg.get("name", ""))
    table = {}
    for entry in cfg.get("coefficients", []):
        k, c = entry
        table[tuple(np.atleast_1d(k).astype(int).tolist())] = complex(*c) if isinstance(c, (list, tuple)) else c
    return make_operator(table, dim=dim, K_op=cfg.get("K_op"), W=W, name=cfg.get("name", ""))


def _scalar_profile(P: UltradiffOperator, W: WeightSequence, length: int) -> np.ndarray:
    """``log(M_n max_{|k| = n} |c_k|)`` for ``n = 0..length-1``."""
    out = np.full(length, -np.inf)
    for n in range(length):
        if n > W.N:
            raise ValueError(f"weight prefix N = {W.N} is too short for order {n}")
        best = max((abs(P.coef(k)) for k in multi_indices(P.dim, n, min_order=n)), default=0.0)
        if best > 0:
            out[n] = math.log(best) + W.log_values[n]
    return out


def certify_class(P: UltradiffOperator, W: WeightSequence, *, length: int | None = None) -> UltradiffOperator:
    """Attach a verified ``(C, u)`` with ``|c_k| <= C / (U_{|k|} M_k)``.

    Orders ``0..length-1`` are certified (coefficients past ``K_op`` come from
    the rule, or vanish for finite-order operators).
    """
    length = min(length or max(CERT_LENGTH, P.K_op + 1), W.N + 1)
    la = _scalar_profile(P, W, length)
    cert = classify_decay(la, log_input=True)
    if cert.verdict != "rapidly_decreasing":
        h = cert.failing_h or 2.0
        k = int(np.argmax(la + np.arange(length) * math.log(h)))
        raise NotOfClassError(
            f"coefficients are not of the class ({cert.verdict}): h^k M_k |c_k| escapes for h = {h:g}, largest at |k| = {k}"
        )
    u = cert.r_witness
    LU = product_sequence(u).log_values
    n = min(length, LU.size)
    # direct re-verification over every stored multi-index
    logC = -math.inf
    for k in multi_indices(P.dim, n - 1):
        c = abs(P.coef(k))
        if c > 0:
            logC = max(logC, math.log(c) + LU[sum(k)] + W.log_values[sum(k)])
    C = math.exp(logC) if logC > -math.inf else 1.0
    if P.order == 0 and P.rule is None:
        C = max(C, abs(P.coef((0,) * P.dim)))
    ratio = 0.0
    for k in multi_indices(P.dim, n - 1):
        c = abs(P.coef(k))
        if c > 0:
            ratio = max(ratio, math.exp(math.log(c) + LU[sum(k)] + W.log_values[sum(k)] - math.log(C)))
    if ratio > 1.0 + REL_TOL:
        raise NotOfClassError(f"certificate re-verification failed: ratio {ratio}")
    return replace(P, certificate=OperatorCertificate(C, u, cert, n - 1, ratio), W=W)


def _require_certified(P: UltradiffOperator) -> None:
    if P.certificate is None:
        raise ValueError("operator is not certified; call certify_class first")


def apply_to_function(P: UltradiffOperator, phi: TestFunction, *, adjoint: bool = False) -> TestFunction:
    """``P(D) phi`` (or ``P(-D) phi``) exactly in the algebra, up to ``K_op``."""
    _require_certified(P)
    if phi.dim != P.dim:
        raise ValueError("dimension mismatch")
    fs, cs = [], []
    for k, c in sorted(P.coefficients.items()):
        fs.append(phi.D(k))
        cs.append(P.adjoint_coef(k) if adjoint else c)
    return add_many(phi.dim, fs, cs)


def apply_to_distribution(P: UltradiffOperator, T: Ultradistribution) -> Ultradistribution:
    """Term by term: ``D^k (c D^j delta_a) = c D^{k+j} delta_a``; densities are differentiated."""
    _require_certified(P)
    if T.dim != P.dim:
        raise ValueError("dimension mismatch")
    if T.polys and not P.finite_order:
        raise UnsupportedCombinationError("an infinite-order operator cannot act on polynomial terms")
    items = sorted(P.coefficients.items())
    pts = []
    for p in T.points:
        for k, c in items:
            pts.append(PointTerm(p.coef * c, tuple(a + b for a, b in zip(p.order, k)), p.at))
    dens = []
    for f in T.densities:
        g = add_many(T.dim, [f.D(k) for k, _ in items], [c for _, c in items])
        if not g.is_zero:
            dens.append(g)
    polys = []
    for q in T.polys:
        acc: dict[tuple[int, ...], complex] = {}
        for k, c in items:
            dq = q.partial(k)
            if dq.is_zero:
                continue
            fac = c * (-1j) ** sum(k)
            for m, a in dq.coeffs:
                acc[m] = acc.get(m, 0.0) + fac * a
        acc = {m: (a.real if a.imag == 0 else a) for m, a in acc.items() if a != 0}
        if acc:
            polys.append(type(q)(q.dim, tuple(sorted(acc.items()))))
    return Ultradistribution(T.dim, tuple(pts), tuple(dens), tuple(polys), f"{P.name or 'P'}({T.label})")


def check_duality(P: UltradiffOperator, T: Ultradistribution, phi: TestFunction, *, tol: float = 1e-8) -> dict[str, Any]:
    """``<P(D) T, phi>`` against ``<T, P(-D) phi>``."""
    lhs = complex(pair(apply_to_distribution(P, T), phi))
    rhs = complex(pair(T, apply_to_function(P, phi, adjoint=True)))
    diff = abs(lhs - rhs)
    return {"lhs": lhs, "rhs": rhs, "difference": diff, "holds": bool(diff <= tol * max(1.0, abs(rhs)))}


# ---------------------------------------------------------------------------
# truncation budget
# ---------------------------------------------------------------------------


def _l1(f: TestFunction) -> float:
    if f.is_zero:
        return 0.0
    val, err = integrate_box(lambda x: np.abs(f(x)), f.bbox(), tol=1e-12, rel_tol=1e-10)
    return float(val + err)


def _mass(S: Ultradistribution, T: Ultradistribution, phi: TestFunction) -> tuple[float, int]:
    """``m, J`` with ``|<S * T, psi>| <= m * max_{|l| <= J} sup |d^l psi|`` on supp phi."""
    if S.polys and T.polys:
        raise UnsupportedCombinationError("no mass bound for two polynomial factors")
    pb = phi.bbox()
    width = float(np.prod(pb[:, 1] - pb[:, 0]))

    def side(V: Ultradistribution, other_box: np.ndarray) -> list[tuple[float, int, np.ndarray]]:
        out = [(abs(p.coef), sum(p.order), np.stack([p.at, p.at], 1)) for p in V.points]
        out += [(_l1(f), 0, f.bbox()) for f in V.densities]
        return out

    total, J = 0.0, 0
    sides_S = side(S, pb)
    sides_T = side(T, pb)
    for a, ja, ba in sides_S:
        for b, jb, bb in sides_T:
            total += a * b
            J = max(J, ja + jb)
    for V, W_ in ((S, T), (T, S)):
        for q in V.polys:
            for a, ja, ba in side(W_, pb):
                # y ranges over supp phi minus the support of the compact factor
                box = np.stack([pb[:, 0] - ba[:, 1], pb[:, 1] - ba[:, 0]], 1)
                pts = np.stack([g.ravel() for g in np.meshgrid(*[np.linspace(lo, hi, 65) for lo, hi in box], indexing="ij")], 1)
                total += a * width * float(np.max(np.abs(q(pts))))
                J = max(J, ja)
    return total, J


def truncation_budget(P: UltradiffOperator, S: Ultradistribution, T: Ultradistribution, phi: TestFunction) -> dict[str, Any]:
    """Bound on ``|<S * T, (P - P_K)(-D) phi>|`` from the certified decay.

    Orders ``K_op < n <= K_op + BUDGET_ORDERS`` are summed with the certified
    coefficient bound ``C / (U_n M_n)`` and exact derivative sups; the rest is
    a geometric tail whose ratio is read off the decreasing envelope of the
    summed terms (infinite if the envelope does not shrink).
    """
    _require_certified(P)
    if P.finite_order:
        return {"budget": 0.0, "terms": [], "tail": 0.0}
    cert = P.certificate
    W = P.W
    mass, J = _mass(S, T, phi)
    top = P.K_op + BUDGET_ORDERS
    LU = product_sequence(cert.u).log_values
    if top + J > 64 or top >= LU.size or top > W.N:
        raise ValueError("budget orders exceed the derivative or prefix range")
    sups = sup_table(phi, top + J)
    per_order = {}
    for k, (v, _) in sups.items():
        per_order[sum(k)] = max(per_order.get(sum(k), 0.0), v)
    terms = []
    for n in range(P.K_op + 1, top + 1):
        count = len(multi_indices(P.dim, n, min_order=n))
        dsup = max(per_order[n + l] for l in range(J + 1))
        terms.append(count * cert.C * math.exp(-LU[n] - W.log_values[n]) * dsup * mass)
    # geometric tail from the suffix-max envelope over the last half of the orders
    env = np.maximum.accumulate(np.asarray(terms)[::-1])[::-1]
    m = len(env) // 2
    rho = float((env[-1] / env[-1 - m]) ** (1.0 / m)) if env[-1 - m] > 0 else 0.0
    tail = float(env[-1] * rho / (1.0 - rho)) if rho < 1.0 else math.inf
    return {"budget": float(sum(terms) + tail), "terms": terms, "tail": tail, "mass": mass, "rho": rho}


# ---------------------------------------------------------------------------
# exchange identity
# ---------------------------------------------------------------------------


def exchange_check(
    P: UltradiffOperator,
    S: Ultradistribution,
    T: Ultradistribution,
    phi_set: Sequence[TestFunction],
    config: dict[str, Any] | None = None,
) -> dict[str, Any]:
    """Three legs ``<S*T, P(-D)phi>``, ``<(P(D)S)*T, phi>``, ``<S*(P(D)T), phi>``."""
    _require_certified(P)
    cfg = dict(config or {})
    tol_agree = cfg.get("tol_agree", TOL_AGREE)
    conv_cfg = {k: v for k, v in cfg.items() if k in ("modes", "units", "N_max", "commutativity_modes", "commutativity_unit")}
    PS = apply_to_distribution(P, S)
    PT = apply_to_distribution(P, T)
    rows = []
    ok = True
    for idx, phi in enumerate(phi_set):
        legs = {}
        for leg, (a, b, f) in {
            "P(D)(S*T)": (S, T, apply_to_function(P, phi, adjoint=True)),
            "(P(D)S)*T": (PS, T, phi),
            "S*(P(D)T)": (S, PT, phi),
        }.items():
            res = convolve(a, b, [f], conv_cfg)[0]
            if not res.convolvable:
                raise ConvolvabilityError(leg, res.failures)
            legs[leg] = res.agreed_value
        vals = list(legs.values())
        spread = float(max(abs(x - y) for x in vals for y in vals))
        budget = truncation_budget(P, S, T, phi)["budget"]
        allowed = tol_agree * max(1.0, max(abs(v) for v in vals)) + 2.0 * budget
        agree = spread <= allowed
        ok = ok and agree
        rows.append(
            {
                "phi": idx,
                "legs": {k: [v.real, v.imag] for k, v in legs.items()},
                "spread": spread,
                "budget": budget,
                "allowed": allowed,
                "agree": bool(agree),
            }
        )
    return {"operator": P.name, "passed": bool(ok), "per_phi": rows}


# ---------------------------------------------------------------------------
# the correction nu_n
# ---------------------------------------------------------------------------


def _x_index(i: Sequence[int], d: int) -> tuple[int, ...]:
    return tuple(i) + (0,) * d


def nu_correction(P: UltradiffOperator, pin: TestFunction, phi: TestFunction) -> TestFunction:
    """``nu_n = sum_{i != 0} D_x^i pi_n * sum_beta (-1)^{|b+i|} C(b+i, i) c_{b+i} (D^b phi)(x + y)``."""
    _require_certified(P)
    d = P.dim
    if pin.dim != 2 * d or phi.dim != d:
        raise ValueError("nu_n needs a unit member on R^{2d} and phi on R^d")
    parts = []
    for i in multi_indices(d, P.K_op, min_order=1):
        fs, cs = [], []
        for beta in multi_indices(d, P.K_op - sum(i)):
            k = tuple(b + j for b, j in zip(beta, i))
            c = P.coef(k)
            if c == 0:
                continue
            binom = math.prod(math.comb(kk, ii) for kk, ii in zip(k, i))
            fs.append(phi.D(beta))
            cs.append((-1) ** sum(k) * binom * c)
        inner = add_many(d, fs, cs)
        if inner.is_zero:
            continue
        Dpi = pin.D(_x_index(i, d))
        if Dpi.is_zero:
            continue
        parts.append(product(Dpi, diag_compose(inner)))
    return add_many(2 * d, parts, [1.0] * len(parts)) if parts else Zero(2 * d)


def nu_direct(P: UltradiffOperator, pin: TestFunction, phi: TestFunction) -> TestFunction:
    """``P(-D_x)(pi_n phi^tri) - pi_n (P(-D) phi)^tri`` via the Leibniz rule of the product."""
    _require_certified(P)
    d = P.dim
    prod = product(pin, diag_compose(phi))
    fs, cs = [], []
    for k, c in sorted(P.coefficients.items()):
        fs.append(prod.D(_x_index(k, d)))
        cs.append(P.adjoint_coef(k))
    lhs = add_many(2 * d, fs, cs)
    rhs = product(pin, diag_compose(apply_to_function(P, phi, adjoint=True)))
    return add_many(2 * d, [lhs, rhs], [1.0, -1.0])


def _tensor_factors(pin: TestFunction) -> tuple[TestFunction, TestFunction] | None:
    """``(a, b)`` with ``pin(x, y) = a(x) b(y)`` for 1-D tensor members, else None."""
    if isinstance(pin, Tensor) and len(pin.factors) == 2 and pin.dim == 2:
        return pin.factors
    if isinstance(pin, Dilated):
        inner = _tensor_factors(pin.f)
        if inner is not None:
            return dilate(inner[0], pin.a), dilate(inner[1], pin.a)
    return None


def _nu_terms(P: UltradiffOperator, pin: TestFunction, phi: TestFunction):
    """``nu_n = sum_i A_i(x) B(y) G_i(x + y)`` for 1-D tensor members."""
    ab = _tensor_factors(pin)
    if ab is None or P.dim != 1:
        return None
    a, b = ab
    terms = []
    for (i,) in multi_indices(1, P.K_op, min_order=1):
        fs, cs = [], []
        for (beta,) in multi_indices(1, P.K_op - i):
            c = P.coef((beta + i,))
            if c != 0:
                fs.append(phi.D((beta,)))
                cs.append((-1) ** (beta + i) * math.comb(beta + i, i) * c)
        G = add_many(1, fs, cs)
        A = a.D((i,))
        if not (G.is_zero or A.is_zero):
            terms.append((A, G))
    return b, terms


def _tables(A, b, G, x, z, K: int):
    Y = (z[None, :] - x[:, None]).ravel()
    tA = [A.partial((j,))(x) for j in range(K + 1)]
    tB = [b.partial((l,))(Y).reshape(x.size, z.size) for l in range(K + 1)]
    tG = [G.partial((m,))(z) for m in range(2 * K + 1)]
    return tA, tB, tG


def _leibniz_block(tables, p: int, q: int) -> np.ndarray:
    """``d_x^p d_y^q [A(x) b(y) G(x + y)]`` from derivative tables on a sheared grid."""
    tA, tB, tG = tables
    acc = 0.0
    for l in range(q + 1):
        for j in range(p + 1):
            acc = acc + (math.comb(p, j) * math.comb(q, l)) * tA[j][:, None] * tB[l] * tG[p - j + q - l][None, :]
    return acc


def nu_sup_table(P: UltradiffOperator, pin: TestFunction, phi: TestFunction, K_max: int, *, grid: int = 128, refine: int = 2) -> dict | None:
    """``{(p, q): sup |d_x^p d_y^q nu_n|}`` on sheared grids, for d = 1.

    Each term ``A(x) b(y) G(x + y)`` is differentiated by the Leibniz rule on
    1-D derivative tables; ``x`` runs over the pieces of ``A`` and ``z = x + y``
    over the pieces of ``G``.  The best grid point is refined on ``refine``
    successively finer local grids.  Returns None when ``pin`` is not a 1-D
    tensor.
    """
    parts = _nu_terms(P, pin, phi)
    if parts is None:
        return None
    b, terms = parts
    ks = multi_indices(2, K_max)
    out = dict.fromkeys(ks, 0.0)
    xs = sorted({tuple(pc[0]) for A, _ in terms for pc in A.pieces()})
    zs = sorted({tuple(pc[0]) for _, G in terms for pc in G.pieces()})
    for xa in xs:
        for zb in zs:
            x0 = np.linspace(xa[0], xa[1], grid)
            z0 = np.linspace(zb[0], zb[1], grid)
            base = [_tables(A, b, G, x0, z0, K_max) for A, G in terms]
            for p, q in ks:
                x, z, tabs = x0, z0, base
                hx, hz = x[1] - x[0], z[1] - z[0]
                for rnd in range(refine + 1):
                    mag = np.abs(sum(_leibniz_block(t, p, q) for t in tabs))
                    i, j = np.unravel_index(int(np.argmax(mag)), mag.shape)
                    out[(p, q)] = max(out[(p, q)], float(mag[i, j]))
                    if rnd == refine:
                        break
                    x = np.linspace(max(xa[0], x[i] - hx), min(xa[1], x[i] + hx), 9)
                    z = np.linspace(max(zb[0], z[j] - hz), min(zb[1], z[j] + hz), 9)
                    hx, hz = x[1] - x[0], z[1] - z[0]
                    tabs = [_tables(A, b, G, x, z, max(p, q) + 0) for A, G in terms]
    return out


def _nu_seminorm(P: UltradiffOperator, pin: TestFunction, phi: TestFunction, t: RSequence, K_max: int, W: WeightSequence) -> float:
    params = SeminormParams("r", r=t, K_max=K_max, W=W)
    table = nu_sup_table(P, pin, phi, K_max)
    if table is None:
        nu = nu_correction(P, pin, phi)
        return 0.0 if nu.is_zero else seminorm(nu, params).value
    logden = params.log_denominators()
    return max((v * math.exp(-logden[p + q]) for (p, q), v in table.items() if v > 0), default=0.0)


def check_nu_identity(P: UltradiffOperator, pin: TestFunction, phi: TestFunction, *, points: int = 41, tol: float = NU_IDENTITY_TOL) -> dict[str, Any]:
    """Pointwise comparison of the regrouped and the direct ``nu_n`` on a grid."""
    d = P.dim
    bb = np.concatenate([pin.bbox()[:d], pin.bbox()[d:]])
    pb = phi.bbox()
    # restrict y so that x + y stays near supp phi
    lo = np.concatenate([bb[:d, 0], pb[:, 0] - bb[:d, 1]])
    hi = np.concatenate([bb[:d, 1], pb[:, 1] - bb[:d, 0]])
    n = max(5, int(points ** (1.0 / 1)) if d == 1 else 9)
    axes = [np.linspace(a, b, n) for a, b in zip(lo, hi)]
    pts = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], 1)
    a = nu_correction(P, pin, phi)(pts)
    b = nu_direct(P, pin, phi)(pts)
    scale_ = max(1.0, float(np.max(np.abs(b))))
    err = float(np.max(np.abs(a - b)))
    return {"max_error": err, "scale": scale_, "holds": bool(err <= tol * scale_), "points": int(pts.shape[0])}


def _binom_multi(a: Sequence[int], b: Sequence[int]) -> int:
    return math.prod(math.comb(x, y) for x, y in zip(a, b))


def _tuples(d: int, order: int, rng: np.random.Generator, samples: int):
    """All ``(alpha, beta, i, j)`` with ``j <= alpha`` (d = 1), a seeded sample otherwise."""
    if d == 1:
        for a, b, i in itertools.product(range(order + 1), repeat=3):
            for j in range(a + 1):
                yield (a,), (b,), (i,), (j,)
        return
    for _ in range(samples):
        a = tuple(int(v) for v in rng.integers(0, order // d + 1, d))
        b = tuple(int(v) for v in rng.integers(0, order // d + 1, d))
        i = tuple(int(v) for v in rng.integers(0, order // d + 1, d))
        j = tuple(int(rng.integers(0, v + 1)) for v in a)
        yield a, b, i, j


def _inequality_chain(P: UltradiffOperator, r: RSequence, W: WeightSequence, A: float, H: float, order: int, seed: int = 0) -> dict[str, Any]:
    """Spot checks of the four estimates used to bound ``nu_n``, in log form."""
    cert = P.certificate
    LR = product_sequence(r).log_values
    LU = product_sequence(cert.u).log_values
    LM = W.log_values
    lA, lH, l2, lC = math.log(A), math.log(H), math.log(2.0), math.log(cert.C)
    fails: dict[str, Any] = {"R2R": None, "MHM": None, "cBei": None, "Bpoi": None}
    counts = dict.fromkeys(fails, 0)
    rng = np.random.default_rng(seed)

    def leq(x, y):
        return x <= y + REL_TOL * max(1.0, abs(x), abs(y))

    for a, b, i, j in _tuples(P.dim, order, rng, 20000):
        na, nb, ni, nj = sum(a), sum(b), sum(i), sum(j)
        nai, nbj = na + ni, nb + nj
        # product-sequence estimate
        lhs = LR[nai - nj] + LR[nbj] - LR[na] - LR[nb] - LR[ni]
        mid = nbj * l2 + LR[nai] - LR[na] - LR[ni]
        counts["R2R"] += 1
        if not (leq(lhs, mid) and leq(mid, (nai + nbj) * l2)) and fails["R2R"] is None:
            fails["R2R"] = [a, b, i, j]
        # weight estimate
        lhs = LM[nai - nj] + LM[nbj] - LM[na] - LM[nb] - LM[ni]
        mid = lA + (nb + nj) * lH + LM[nai] - LM[na] - LM[ni]
        counts["MHM"] += 1
        if not (leq(lhs, mid) and leq(mid, 2 * lA + (nai + nbj) * lH)) and fails["MHM"] is None:
            fails["MHM"] = [a, b, i, j]
        # coefficient estimate
        k = tuple(x + y for x, y in zip(b, i))
        c = abs(P.coef(k)) if sum(k) <= cert.checked_orders else 0.0
        counts["cBei"] += 1
        first = c == 0 or leq(math.log(c), lC - LU[nb] - LU[ni] - LM[nb] - LM[ni])
        second = leq(LR[nb] + LR[ni], LU[nb] + LU[ni])
        if not (first and second) and fails["cBei"] is None:
            fails["cBei"] = [a, b, i, j]
        counts["Bpoi"] += 1
        if _binom_multi(k, i) > 2 ** sum(k) and fails["Bpoi"] is None:
            fails["Bpoi"] = [a, b, i, j]
    return {
        name: {"holds": fails[name] is None, "tuples": counts[name], "first_violation": fails[name]}
        for name in fails
    }


def nu_pairings(P: UltradiffOperator, unit: ApproximateUnit, phi: TestFunction, S: Ultradistribution, T: Ultradistribution, *, N_max: int = 12) -> dict[str, Any]:
    """``<S (x) T, nu_n>`` for ``n = 1..N_max``, with and without the cutoff ``theta(x + y)``.

    ``exactly_zero_from`` is the first ``n`` after which every value is exactly 0.
    """
    pb = phi.bbox()
    theta = diag_compose(plateau(np.stack([pb[:, 0] - THETA_INFLATE, pb[:, 1] + THETA_INFLATE], 1), THETA_INFLATE))
    eff = support_box(S, T, phi)
    vals, cut, n0 = [], [], None
    for k in range(1, N_max + 1):
        nu = nu_correction(P, unit.member(k), phi)
        vals.append(complex(tensor_pair(S, T, nu)) if not nu.is_zero else 0j)
        cut.append(complex(tensor_pair(S, T, product(theta, nu))) if not nu.is_zero else 0j)
    for k in range(N_max, 0, -1):
        if vals[k - 1] != 0:
            break
        n0 = k
    return {
        "values": [[v.real, v.imag] for v in vals],
        "theta_difference": float(max(abs(a - b) for a, b in zip(vals, cut))),
        "exactly_zero_from": n0,
        "covered_from": unit.first_covering(eff, N_max) if eff is not None else None,
    }


def nu_bound_check(
    P: UltradiffOperator,
    unit: ApproximateUnit,
    phi: TestFunction,
    t: RSequence,
    *,
    K_max: int = 12,
    N_max: int = 12,
    S: Ultradistribution | None = None,
    T: Ultradistribution | None = None,
    ineq_order: int = INEQ_ORDER,
    prefix: int = NU_PREFIX,
) -> dict[str, Any]:
    """Bounds on ``nu_n``: seminorms, pairings against ``S (x) T`` and the estimate chain.

    The shift that pushes ``r`` above ``16 H^2`` needs long prefixes, so the
    weight sequence and the certificate are extended to ``prefix`` entries.
    """
    _require_certified(P)
    d = P.dim
    if unit.dim != 2 * d:
        raise ValueError("nu_n needs a unit on R^{2d}")
    if t.N < prefix:
        raise ValueError(f"t needs a prefix of at least {prefix} entries")
    W = P.W
    if W.N < prefix:
        if W.family == "explicit":
            raise ValueError("an explicit weight prefix cannot be extended; supply a longer one")
        W = make_weight_sequence(W.family, prefix, s=W.s)
    if P.certificate.u.N < prefix:
        P = certify_class(P, W, length=prefix + 1)
    m2 = check_condition(W, "M2")
    if not m2.holds_on_prefix:
        raise ValueError("the weight sequence fails M2 on its prefix")
    A, H = m2.witness_constants
    cert = P.certificate

    # auxiliary sequences
    n = min(t.N, cert.u.N)
    s = elementwise_min(RSequence(t.values[: n + 1], t.family), RSequence(cert.u.values[: n + 1], cert.u.family))
    r = pp_minorant(s)
    r_shift = shift_rsequence(r, 16.0 * H * H)
    r_bar = scale_lambda(r_shift, 1.0 / (8.0 * H))
    r_bbar = scale_lambda(r_shift, 1.0 / (16.0 * H * H))
    aux = {
        "r_below_s": bool(np.all(r.values <= s.values * (1 + REL_TOL))),
        "r_pp_inequality": check_pp_inequality(r).holds_on_prefix,
        "shifted_above_16H2": bool(np.all(r_shift.values[1:] > 16.0 * H * H)),
        "shifted_length": r_shift.N,
        "r_bar_1": float(r_bar.values[1]),
        "r_bbar_1": float(r_bbar.values[1]),
        "A": A,
        "H": H,
    }

    # (a) seminorms of nu_n with respect to t
    norms = []
    for k in range(1, N_max + 1):
        norms.append(_nu_seminorm(P, unit.member(k), phi, t, K_max, W))
    half = N_max // 2
    bounded = max(norms[half:]) <= max(norms[:half]) * (1.0 + 1e-9)

    # (b) pairings against S (x) T, with and without the cutoff theta(x + y)
    pairings = nu_pairings(P, unit, phi, S, T, N_max=N_max) if S is not None and T is not None else None

    chain = _inequality_chain(P, r, W, A, H, ineq_order)
    passed = bounded and aux["r_below_s"] and aux["r_pp_inequality"] and aux["shifted_above_16H2"] and all(v["holds"] for v in chain.values())
    if pairings is not None:
        passed = passed and pairings["exactly_zero_from"] is not None
    return {
        "passed": bool(passed),
        "seminorms": {"values": norms, "sup": max(norms), "bounded": bool(bounded)},
        "pairings": pairings,
        "auxiliary": aux,
        "inequalities": chain,
    }
