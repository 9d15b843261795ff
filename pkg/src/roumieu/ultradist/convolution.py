"""Sequential convolution and the integrability diagnostics.

For a test function ``phi`` and an approximate unit ``(pi_n)`` the modes are

* ``eps``:  ``<S (x) T, pi_n phi(x + y)>`` with a unit on ``R^{2d}``,
* ``pi``:   ``<(pi_n S) (x) (pi_n T), phi(x + y)>``,
* ``pi1``:  ``<(pi_n S) (x) T, phi(x + y)>``,
* ``pi2``:  ``<S (x) (pi_n T), phi(x + y)>``.

``S`` and ``T`` are convolvable in a mode when the sequence is Cauchy; the
convolution at ``phi`` is its limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from ..bumpcalc.algebra import TestFunction, diag_compose, product
from ..bumpcalc.seminorms import SeminormParams, seminorm
from ..bumpcalc.units import ApproximateUnit, Schedule, make_unit
from ..rclass import RSequence
from .distribution import TOL_Q, Ultradistribution, _sides, convolve_with_function, effective_box, pair, tensor_pair

__all__ = [
    "MODES",
    "WINDOW",
    "CAUCHY_TOL",
    "TOL_AGREE",
    "CauchyDiagnostics",
    "ConvolutionResult",
    "diagnose",
    "default_units",
    "convolvability_sequence",
    "convolve",
    "integrability_test",
    "c3_check",
]

MODES = ("eps", "pi", "pi1", "pi2")
WINDOW = 5
CAUCHY_TOL = 1e-8
UNBOUNDED_FACTOR = 1e6
TOL_AGREE = 1e-7
N_MAX = 20


@dataclass(frozen=True)
class CauchyDiagnostics:
    values: tuple[complex, ...]
    converged: bool
    limit: complex | None
    osc: float
    divergence_kind: str | None
    window: int = WINDOW
    tol: float = CAUCHY_TOL

    def to_dict(self) -> dict[str, Any]:
        return {
            "values": [[float(np.real(v)), float(np.imag(v))] for v in self.values],
            "converged": self.converged,
            "limit": None if self.limit is None else [float(np.real(self.limit)), float(np.imag(self.limit))],
            "osc": self.osc,
            "divergence_kind": self.divergence_kind,
        }


def _growing(mags: np.ndarray) -> bool:
    """Trailing moduli increase with increments that do not shrink."""
    inc = np.diff(mags)
    if inc.size < 2 or np.any(inc <= 0):
        return False
    return bool(np.all(inc[1:] >= 0.5 * inc[:-1]))


def diagnose(values: Sequence[complex], *, window: int = WINDOW, tol: float = CAUCHY_TOL) -> CauchyDiagnostics:
    """Cauchy test on the trailing window, with divergence classification."""
    v = np.asarray(values, dtype=complex)
    if v.size < window:
        raise ValueError("sequence shorter than the Cauchy window")
    tail = v[-window:]
    osc = float(np.max(np.abs(tail[:, None] - tail[None, :])))
    scale_ = max(1.0, abs(v[-1]))
    vals = tuple(complex(x) for x in v)
    if osc <= tol * scale_:
        lim = complex(v[-1])
        return CauchyDiagnostics(vals, True, lim, osc, None, window, tol)
    mags = np.abs(v)
    if np.any(mags > UNBOUNDED_FACTOR * (1.0 + mags[0])) or _growing(mags[-window:]):
        kind = "unbounded"
    else:
        kind = "oscillating"
    return CauchyDiagnostics(vals, False, None, osc, kind, window, tol)


@dataclass(frozen=True)
class ConvolutionResult:
    per_mode: dict[str, CauchyDiagnostics]
    agreed_value: complex | None
    cross_mode_spread: float
    commutativity_spread: float | None = None
    failures: tuple[str, ...] = ()
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def convolvable(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict[str, Any]:
        av = self.agreed_value
        return {
            "per_mode": {k: v.to_dict() for k, v in sorted(self.per_mode.items())},
            "agreed_value": None if av is None else [float(np.real(av)), float(np.imag(av))],
            "cross_mode_spread": self.cross_mode_spread,
            "commutativity_spread": self.commutativity_spread,
            "failures": list(self.failures),
            "details": self.details,
        }


def default_units(dim: int = 1) -> dict[str, ApproximateUnit]:
    """Two plateau schedules (special) and one dilation unit (general)."""
    return {
        "plateau": make_unit("plateau", dim, Schedule(1.0, 1.0, 0.0), name="plateau"),
        "plateau2": make_unit("plateau", dim, Schedule(2.0, 1.0, 0.0), name="plateau2"),
        "dilation": make_unit("dilation", dim, Schedule(1.0, 1.0, 0.0), name="dilation"),
    }


def _lift(unit: ApproximateUnit, dim: int) -> ApproximateUnit:
    """The same construction on ``R^dim`` (used for the ``eps`` mode)."""
    if unit.dim == dim:
        return unit
    return make_unit(unit.kind, dim, unit.schedule, margin=unit.margin, special=unit.special, name=unit.name)


def support_box(S: Ultradistribution, T: Ultradistribution, phi: TestFunction) -> np.ndarray | None:
    """Hull of the effective supports of ``S (x) T`` against ``phi(x + y)``, or None."""
    d = S.dim
    tri = diag_compose(phi)
    hull = None
    for ls in _sides(S):
        for rs in _sides(T):
            box = np.zeros((2 * d, 2))
            box[:d] = np.stack([ls[3], ls[3]], 1) if ls[0] == "pt" else ls[2]
            box[d:] = np.stack([rs[3], rs[3]], 1) if rs[0] == "pt" else rs[2]
            eb = effective_box(tri, box)
            if np.any(eb[:, 1] < eb[:, 0]):
                continue
            if not np.all(np.isfinite(eb)):
                return None
            hull = eb if hull is None else np.stack([np.minimum(hull[:, 0], eb[:, 0]), np.maximum(hull[:, 1], eb[:, 1])], 1)
    return hull


def _contains(inner: np.ndarray, box: np.ndarray) -> bool:
    return bool(np.all(inner[:, 0] <= box[:, 0]) and np.all(inner[:, 1] >= box[:, 1]))


def _covered(mode: str, u1: ApproximateUnit, u2: ApproximateUnit, n: int, eff: np.ndarray, d: int) -> bool:
    if mode == "eps":
        return _contains(_lift(u1, 2 * d).inner_box(n), eff)
    x_ok = _contains(u1.inner_box(n), eff[:d])
    y_ok = _contains(u2.inner_box(n), eff[d:])
    return {"pi": x_ok and y_ok, "pi1": x_ok, "pi2": y_ok}[mode]


def convolvability_sequence(
    S: Ultradistribution,
    T: Ultradistribution,
    phi: TestFunction,
    unit: ApproximateUnit | tuple[ApproximateUnit, ApproximateUnit],
    mode: str,
    *,
    N_max: int = N_MAX,
    tol: float = TOL_Q,
    window: int = WINDOW,
    cauchy_tol: float = CAUCHY_TOL,
    reuse_covered: bool = True,
    base_cache: dict | None = None,
) -> CauchyDiagnostics:
    """The scalar sequence of ``mode`` for ``n = 1..N_max`` and its diagnostics.

    With ``reuse_covered`` the entries for which the unit member is identically
    1 on the effective support of ``S (x) T`` against ``phi(x + y)`` are taken
    from the pairing without the unit; the two are equal by construction.
    ``base_cache`` shares that pairing between calls with the same ``S, T, phi``.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    d = S.dim
    if isinstance(unit, tuple):
        u1, u2 = unit
    else:
        u1 = u2 = unit
    tri = diag_compose(phi)
    eff = support_box(S, T, phi) if reuse_covered else None
    cache = base_cache if base_cache is not None else {}
    values = []
    for n in range(1, N_max + 1):
        if eff is not None and _covered(mode, u1, u2, n, eff, d):
            # the multiplier is identically 1 on the effective support
            if "base" not in cache:
                cache["base"] = tensor_pair(S, T, tri, tol=tol)
            values.append(cache["base"])
            continue
        if mode == "eps":
            pin = _lift(u1, 2 * d).member(n)
            values.append(tensor_pair(S, T, product(pin, tri), tol=tol))
        elif mode == "pi":
            values.append(tensor_pair(S.multiplied(u1.member(n)), T.multiplied(u2.member(n)), tri, tol=tol))
        elif mode == "pi1":
            values.append(tensor_pair(S.multiplied(u1.member(n)), T, tri, tol=tol))
        else:
            values.append(tensor_pair(S, T.multiplied(u2.member(n)), tri, tol=tol))
    return diagnose(values, window=window, tol=cauchy_tol)


def convolve(
    S: Ultradistribution,
    T: Ultradistribution,
    phi_set: Sequence[TestFunction],
    config: dict[str, Any] | None = None,
) -> list[ConvolutionResult]:
    """All requested modes and units for each ``phi``, with agreement checks.

    ``config`` keys: ``modes``, ``units`` (name -> unit), ``N_max``,
    ``tol_agree``, ``commutativity_modes``, ``commutativity_unit``.
    """
    if not phi_set:
        raise ValueError("phi_set must be nonempty")
    cfg = dict(config or {})
    modes = tuple(cfg.get("modes", MODES))
    units = cfg.get("units") or default_units(S.dim)
    N_max = cfg.get("N_max", N_MAX)
    tol_agree = cfg.get("tol_agree", TOL_AGREE)
    comm_modes = tuple(cfg.get("commutativity_modes", ("eps", "pi")))
    comm_unit = cfg.get("commutativity_unit", next(iter(units)))
    results = []
    for phi in phi_set:
        per_mode: dict[str, CauchyDiagnostics] = {}
        shared: dict = {}
        for mode in modes:
            for name, unit in units.items():
                per_mode[f"{mode}/{name}"] = convolvability_sequence(S, T, phi, unit, mode, N_max=N_max, base_cache=shared)
        failures = tuple(f"{k}: {v.divergence_kind}" for k, v in per_mode.items() if not v.converged)
        limits = [v.limit for v in per_mode.values() if v.converged]
        spread = float(max(abs(a - b) for a in limits for b in limits)) if limits else math.inf
        agreed = None
        if not failures and spread <= tol_agree * max(1.0, max(abs(x) for x in limits)):
            agreed = complex(np.mean(limits))
        comm = None
        if not failures and comm_modes:
            shared_rev: dict = {}
            rev = [convolvability_sequence(T, S, phi, units[comm_unit], m, N_max=N_max, base_cache=shared_rev) for m in comm_modes]
            if all(r.converged for r in rev):
                comm = float(max(abs(r.limit - lim) for r in rev for lim in limits))
            else:
                failures = failures + tuple(f"commuted {m}/{comm_unit}: {r.divergence_kind}" for m, r in zip(comm_modes, rev) if not r.converged)
        if agreed is None and not failures:
            failures = (f"modes disagree: spread {spread:.3g}",)
        results.append(ConvolutionResult(per_mode, agreed, spread, comm, failures))
    return results


def integrability_test(
    V: Ultradistribution,
    units: Sequence[ApproximateUnit],
    *,
    N_max: int = N_MAX,
    r_list: Sequence[RSequence] = (),
    dictionary: Sequence[TestFunction] = (),
    K_max: int = 12,
) -> dict[str, Any]:
    """Cauchy-ness of ``<V, pi_n>`` for general and special units.

    The heuristic boundedness diagnostic reports, for each supplied
    R-sequence, ``max |<V, phi>| / ||phi||_(r)`` over ``dictionary``.
    """
    kinds = {u.special for u in units}
    if kinds != {True, False}:
        raise ValueError("integrability test needs at least one general and one special unit")
    per_unit = {}
    for u in units:
        vals = [pair(V, u.member(n)) for n in range(1, N_max + 1)]
        per_unit[u.name or u.kind] = diagnose(vals)
    diags = list(per_unit.values())
    if all(dg.converged for dg in diags):
        lims = [dg.limit for dg in diags]
        spread = max(abs(a - b) for a in lims for b in lims)
        verdict = "integrable_evidence" if spread <= TOL_AGREE * max(1.0, abs(lims[0])) else "inconclusive"
    elif any(dg.divergence_kind == "unbounded" for dg in diags):
        verdict = "not_integrable"
    else:
        verdict = "inconclusive"
    heuristic = {}
    for r in r_list:
        ratios = []
        for phi in dictionary:
            nrm = seminorm(phi, SeminormParams("r", r=r, K_max=K_max)).value
            ratios.append(abs(pair(V, phi)) / nrm if nrm > 0 else 0.0)
        heuristic[r.family] = max(ratios) if ratios else None
    return {
        "verdict": verdict,
        "per_unit": {k: v.to_dict() for k, v in per_unit.items()},
        "limit": None if not all(dg.converged for dg in diags) else [float(np.real(diags[0].limit)), float(np.imag(diags[0].limit))],
        "bounded_ratio": heuristic,
    }


def c3_check(
    S: Ultradistribution,
    T: Ultradistribution,
    phi: TestFunction,
    psi: TestFunction,
    *,
    half_widths: Sequence[float] = (2.0, 4.0, 8.0, 16.0, 32.0),
    rel_tol: float = 1e-8,
    panel_width: float = 0.125,
) -> dict[str, Any]:
    """Integrals of ``|(S-check * phi)(T * psi)|`` over growing intervals (d = 1)."""
    if S.dim != 1:
        raise NotImplementedError("the c3 diagnostic is implemented for d = 1")
    Sc = S.reflected()
    xi, wi = np.polynomial.legendre.leggauss(8)
    L = max(half_widths)
    panels = int(round(2 * L / panel_width))
    edges = np.linspace(-L, L, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    xs = (mid[:, None] + half[:, None] * xi[None, :]).ravel()
    ws = (half[:, None] * wi[None, :]).ravel()
    u = convolve_with_function(Sc, phi, xs)
    v = convolve_with_function(T, psi, xs)
    integrand = np.abs(u * v) * ws
    integrals = []
    for w in half_widths:
        integrals.append(float(np.sum(integrand[np.abs(xs) <= w])))
    incs = np.diff(integrals)
    converged = bool(abs(incs[-1]) <= rel_tol * max(1.0, abs(integrals[-1])))
    diverging = bool(not converged and np.all(incs > 0) and incs[-1] >= 0.5 * incs[-2])
    return {
        "half_widths": list(half_widths),
        "integrals": integrals,
        "converged": converged,
        "divergence_kind": None if converged else ("unbounded" if diverging else "oscillating"),
        "value": integrals[-1] if converged else None,
    }
