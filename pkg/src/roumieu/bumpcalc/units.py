"""Approximate units: sequences of test functions converging to 1.

Two constructions are provided.  A *plateau* unit has members equal to 1 on
``[-a_n, a_n]^d`` with a fixed margin, so every compact set is eventually
covered exactly (a special unit).  A *dilation* unit has members
``psi(x / a_n)`` for a fixed plateau profile ``psi``; each derivative of
order ``k`` shrinks by ``a_n^{-|k|}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from ..rclass import RSequence
from ..weights import WeightSequence
from .algebra import TestFunction, dilate, multi_indices
from .plateau import plateau
from .seminorms import SeminormParams, seminorm

__all__ = ["Schedule", "ApproximateUnit", "make_unit", "unit_from_config", "verify_unit", "UnitReport"]

CONVERGENCE_TOL = 1e-8
CONVERGENCE_WINDOW = 5
TEST_BOX_HALF_WIDTHS = (1.0, 2.0, 4.0)
BOX_GRID = 257


@dataclass(frozen=True)
class Schedule:
    """``a_n = scale * n^power + offset``."""

    scale: float = 1.0
    power: float = 1.0
    offset: float = 0.0

    def __call__(self, n: int) -> float:
        return self.scale * float(n) ** self.power + self.offset

    def describe(self) -> dict[str, float]:
        return {"scale": self.scale, "power": self.power, "offset": self.offset}


@dataclass(frozen=True, eq=False)
class ApproximateUnit:
    kind: str
    dim: int
    schedule: Schedule
    profile: TestFunction | None = None
    margin: float = 1.0
    special: bool = False
    name: str = ""

    def member(self, n: int) -> TestFunction:
        a = self.schedule(n)
        if not a > 0:
            raise ValueError(f"schedule value a_{n} = {a} is not positive")
        if self.kind == "plateau":
            return plateau([[-a, a]] * self.dim, self.margin)
        return dilate(self.profile, a)

    def inner_box(self, n: int) -> np.ndarray:
        """Box on which member ``n`` equals 1."""
        a = self.schedule(n)
        if self.kind == "plateau":
            return np.array([[-a, a]] * self.dim)
        return a * np.array([[-1.0, 1.0]] * self.dim)

    def first_covering(self, box: np.ndarray, N_max: int) -> int | None:
        """Smallest n from which every member up to N_max equals 1 on ``box``."""
        n0 = None
        for n in range(1, N_max + 1):
            ib = self.inner_box(n)
            if np.all(ib[:, 0] <= box[:, 0]) and np.all(ib[:, 1] >= box[:, 1]):
                if n0 is None:
                    n0 = n
            else:
                n0 = None
        return n0

    def describe(self) -> dict[str, Any]:
        return {"kind": self.kind, "dim": self.dim, "schedule": self.schedule.describe(), "margin": self.margin, "special": self.special, "name": self.name}


def make_unit(
    kind: str,
    dim: int = 1,
    schedule: Schedule | None = None,
    *,
    profile: TestFunction | None = None,
    margin: float = 1.0,
    special: bool | None = None,
    name: str = "",
) -> ApproximateUnit:
    """Plateau units are special; dilation units default to the general kind."""
    schedule = schedule or Schedule()
    if kind == "plateau":
        return ApproximateUnit("plateau", dim, schedule, None, margin, True if special is None else special, name or "plateau")
    if kind == "dilation":
        if profile is None:
            profile = plateau([[-1.0, 1.0]] * dim, margin)
        if profile.dim != dim:
            raise ValueError("profile dimension does not match the unit dimension")
        # psi must equal 1 on a neighbourhood of 0
        if abs(profile(np.zeros((1, dim)))[0] - 1.0) > 1e-14:
            raise ValueError("dilation profile must equal 1 near the origin")
        return ApproximateUnit("dilation", dim, schedule, profile, margin, bool(special) if special is not None else False, name or "dilation")
    raise ValueError(f"unknown unit kind {kind!r}")


def unit_from_config(cfg: dict[str, Any], dim: int = 1) -> ApproximateUnit:
    sch = cfg.get("schedule", {})
    return make_unit(
        cfg.get("kind", "plateau"),
        cfg.get("dim", dim),
        Schedule(sch.get("scale", 1.0), sch.get("power", 1.0), sch.get("offset", 0.0)),
        margin=cfg.get("margin", 1.0),
        special=cfg.get("special"),
        name=cfg.get("name", ""),
    )


@dataclass(frozen=True)
class UnitReport:
    passed: bool
    bounded: dict[str, Any]
    convergence: dict[str, Any]
    special: dict[str, Any]
    counterexample: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"passed": self.passed, "bounded": self.bounded, "convergence": self.convergence, "special": self.special, "counterexample": self.counterexample}


def _box_grid(box: np.ndarray, n: int) -> np.ndarray:
    axes = [np.linspace(lo, hi, n) for lo, hi in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _deviation(f: TestFunction, box: np.ndarray, K_max: int) -> float:
    """``max_{|k| <= K_max} sup_box |d^k (f - 1)|`` on a grid."""
    pts = _box_grid(box, BOX_GRID if f.dim == 1 else max(9, int(BOX_GRID ** (1 / f.dim))))
    worst = float(np.max(np.abs(f(pts) - 1.0)))
    for k in multi_indices(f.dim, K_max, min_order=1):
        fk = f.partial(k)
        if fk.is_zero:
            continue
        worst = max(worst, float(np.max(np.abs(fk(pts)))))
    return worst


def verify_unit(
    U: ApproximateUnit,
    r_list: Sequence[RSequence],
    *,
    W: WeightSequence | None = None,
    K_max: int = 12,
    N_max: int = 20,
    box_half_widths: Sequence[float] = TEST_BOX_HALF_WIDTHS,
) -> UnitReport:
    """Check truncated seminorm boundedness and convergence to 1 on compacts; also report the special flag."""
    counterexample = None
    members = [U.member(n) for n in range(1, N_max + 1)]

    # (a) uniform bound of the r-seminorms over n <= N_max
    bounded: dict[str, Any] = {}
    half = N_max // 2
    for idx, r in enumerate(r_list):
        vals = [seminorm(m, SeminormParams("r", r=r, K_max=K_max, W=W)).value for m in members]
        lead = max(vals[:half])
        trail = max(vals[half:])
        ok = trail <= lead * (1.0 + 1e-12)
        entry: dict[str, Any] = {"family": r.family, "sup": max(vals), "values": vals, "bounded": ok}
        if U.kind == "dilation":
            psi = seminorm(U.profile, SeminormParams("r", r=r, K_max=K_max, W=W)).value
            within = [v <= psi for v, n in zip(vals, range(1, N_max + 1)) if U.schedule(n) >= 1.0]
            entry["profile_norm"] = psi
            entry["uniform_bound_by_profile"] = bool(all(within)) and len(within) > 0
            ok = ok and entry["uniform_bound_by_profile"]
            entry["bounded"] = ok
        bounded[f"r{idx}"] = entry
        if not ok and counterexample is None:
            n_bad = int(np.argmax(vals)) + 1
            counterexample = f"seminorm for r-sequence {r.family} grows with n (max at n = {n_bad})"

    # (b) convergence to 1 with all derivatives up to K_max on test boxes
    convergence: dict[str, Any] = {}
    for w in box_half_widths:
        box = np.array([[-w, w]] * U.dim)
        devs = [_deviation(m, box, K_max) for m in members]
        trailing = devs[-CONVERGENCE_WINDOW:]
        ok = max(trailing) <= CONVERGENCE_TOL
        convergence[f"box_{w:g}"] = {"deviations": devs, "converged": ok}
        if not ok and counterexample is None:
            counterexample = f"members do not converge to 1 on [-{w:g}, {w:g}]^{U.dim}: deviation {trailing[-1]:.3g} at n = {N_max}"

    # (c) special flag: members equal 1 on each box from some n0 on
    special: dict[str, Any] = {"flag": U.special}
    for w in box_half_widths:
        box = np.array([[-w, w]] * U.dim)
        n0 = U.first_covering(box, N_max)
        exact = False
        if n0 is not None:
            pts = _box_grid(box, BOX_GRID if U.dim == 1 else 17)
            exact = all(bool(np.all(members[n - 1](pts) == 1.0)) for n in range(n0, N_max + 1))
        special[f"box_{w:g}"] = {"n0": n0, "identically_one": exact}
        if U.special and not exact and counterexample is None:
            counterexample = f"unit flagged special but members are not 1 on [-{w:g}, {w:g}]^{U.dim}"

    return UnitReport(counterexample is None, bounded, convergence, special, counterexample)
