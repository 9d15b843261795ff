"""Experiment configuration: YAML loading with validation, then object construction.

A config is a tree with the top-level keys listed in ``TOP_LEVEL``.  Objects
are declared by name (functions, distributions, units, operators, R-sequences)
and referenced by name elsewhere.  The distribution-pair matrix may live in a
separate fixture file named by ``matrix``; relative paths resolve against the
config file, then against the bundled data directory.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from ..bumpcalc import TestFunction, bump, poly
from ..bumpcalc.units import ApproximateUnit, unit_from_config
from ..rclass import RSequence, make_rsequence
from ..ultradist import Ultradistribution, delta, density, poly_density
from ..weights import WeightSequence, weight_from_config

__all__ = ["ConfigError", "ExperimentConfig", "SUITES", "load_config", "bundled_path", "build_rsequence"]

SUITES = ("weights", "rclass", "komatsu", "seminorms", "units", "integrability", "convolution", "exchange", "nu")
TOP_LEVEL = {
    "version",
    "seed",
    "weights",
    "K_max",
    "N_max",
    "tolerances",
    "rsequences",
    "functions",
    "units",
    "distributions",
    "matrix",
    "pairs",
    "test_functions",
    "operators",
    "suites",
    "output",
    "checks",
}
DEFAULT_TOLERANCES = {"quadrature": 1e-10, "cauchy": 1e-8, "agree": 1e-7, "oracle": 1e-6}


class ConfigError(ValueError):
    """Invalid configuration; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("roumieu") / "data" / name))


def _need(tree: dict, key: str, path: str):
    if key not in tree:
        raise ConfigError(f"{path}.{key}" if path else key, "missing")
    return tree[key]


def build_rsequence(spec: dict[str, Any], path: str) -> RSequence:
    """Named families plus ``exp2`` (2^p) and ``slow_then_linear`` for fixtures."""
    fam = spec.get("family", "linear")
    N = int(spec.get("N", 256))
    p = np.arange(N + 1, dtype=float)
    try:
        if fam == "exp2":
            v = 2.0 ** np.minimum(p, 60.0)
        elif fam == "slow_then_linear":
            knee = int(spec.get("knee", 64))
            slope = float(spec.get("slow_slope", 0.01))
            v = np.where(p <= knee, 1.0 + slope * p, 1.0 + slope * knee + (p - knee))
        elif fam == "affine":
            v = float(spec.get("offset", 0.0)) + float(spec.get("slope", 1.0)) * p
        elif fam == "step":
            width = int(spec.get("width", 8))
            v = 1.0 + np.floor(p / width)
        else:
            return make_rsequence(fam, N, alpha=spec.get("alpha"), values=spec.get("values"))
        v[0] = 1.0
        return RSequence(v, family=spec.get("name", fam))
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def _normalize_distribution(spec: Any, path: str) -> dict[str, Any]:
    """Accept ``{kind: delta, ...}`` or the nested ``{delta: {...}}`` form."""
    if not isinstance(spec, dict):
        raise ConfigError(path, "distribution spec must be a mapping")
    if "kind" in spec:
        out = dict(spec)
    elif len(spec) == 1 and next(iter(spec)) in ("delta", "density", "poly"):
        kind, body = next(iter(spec.items()))
        out = dict(body or {}, kind=kind)
    else:
        raise ConfigError(path, "distribution spec needs a kind (delta, density or poly)")
    if isinstance(out.get("coef"), (list, tuple)):
        if len(out["coef"]) != 2:
            raise ConfigError(path + ".coef", "complex coefficients are written as [re, im]")
    return out


def _coef(c) -> complex:
    return complex(*c) if isinstance(c, (list, tuple)) else complex(c)


def _build_function(spec: dict[str, Any], path: str) -> TestFunction:
    kind = spec.get("kind", "bump")
    if kind == "bump":
        return bump(spec.get("center", 0.0), spec.get("radius", 1.0), spec.get("coef", 1.0))
    if kind == "poly":
        return poly(spec["coeffs"])
    raise ConfigError(path + ".kind", f"unknown function kind {kind!r}")


@dataclass
class ExperimentConfig:
    raw: dict[str, Any]
    source: str
    seed: int
    W: WeightSequence
    K_max: int
    N_max: int
    tolerances: dict[str, float]
    rsequences: dict[str, RSequence]
    functions: dict[str, TestFunction]
    units: dict[str, ApproximateUnit]
    distributions: dict[str, Ultradistribution]
    dist_specs: dict[str, dict[str, Any]]
    function_specs: dict[str, dict[str, Any]]
    pairs: list[dict[str, Any]]
    test_functions: list[str]
    operators: dict[str, dict[str, Any]]
    suites: list[str]
    checks: dict[str, Any]
    output: dict[str, Any] = field(default_factory=dict)

    def select(self, suites: list[str]) -> "ExperimentConfig":
        bad = [s for s in suites if s not in SUITES]
        if bad:
            raise ConfigError("suites", f"unknown suite(s) {bad}; choose from {list(SUITES)}")
        if not suites:
            raise ConfigError("suites", "suite list is empty")
        _require_sections(suites, self.checks, self.operators, self.pairs)
        out = copy.copy(self)
        out.suites = list(suites)
        return out

    def check(self, suite: str) -> dict[str, Any]:
        return dict(self.checks.get(suite) or {})


#: (suite, key) -> namespace that the referenced names must belong to
_REFERENCES = {
    ("units", "units"): "units",
    ("units", "rsequences"): "rsequences",
    ("integrability", "units"): "units",
    ("convolution", "units"): "units",
    ("convolution", "negative_unit"): "units",
    ("exchange", "units"): "units",
    ("exchange", "operators"): "operators",
    ("nu", "operator"): "operators",
    ("nu", "unit"): "units",
    ("nu", "phi"): "functions",
    ("nu", "t"): "rsequences",
    ("nu", "pairs"): "pairs",
}


def _validate_checks(checks: dict[str, Any], **spaces) -> None:
    def need(path: str, names, space: str):
        for name in [names] if isinstance(names, str) else list(names):
            if name not in spaces[space]:
                raise ConfigError(path, f"unknown {space[:-1]} {name!r}")

    for (suite, key), space in _REFERENCES.items():
        opts = checks.get(suite) or {}
        if key in opts:
            need(f"checks.{suite}.{key}", opts[key], space)
    for i, case in enumerate((checks.get("integrability") or {}).get("cases", [])):
        need(f"checks.integrability.cases[{i}].distribution", case.get("distribution"), "distributions")
    conv = checks.get("convolution") or {}
    for key in ("recompute", "c3"):
        for i, spot in enumerate(conv.get(key, [])):
            need(f"checks.convolution.{key}[{i}].pair", spot.get("pair"), "pairs")
    ex = checks.get("exchange") or {}
    for op, names in (ex.get("pairs") or {}).items():
        need(f"checks.exchange.pairs.{op}", names, "pairs")
    for op, names in (ex.get("test_functions") or {}).items():
        need(f"checks.exchange.test_functions.{op}", names, "functions")
    nu = checks.get("nu")
    if nu is not None:
        for key in ("operator", "unit", "t"):
            if key not in nu:
                raise ConfigError(f"checks.nu.{key}", "missing")


def _require_sections(suites, checks, operators, pairs) -> None:
    if "nu" in suites and not checks.get("nu"):
        raise ConfigError("checks.nu", "required when the nu suite is selected")
    if "exchange" in suites and not operators:
        raise ConfigError("operators", "the exchange suite needs at least one operator")
    if any(s in suites for s in ("convolution", "exchange")) and not pairs:
        raise ConfigError("pairs", "the convolution and exchange suites need distribution pairs")


def _load_yaml(path: Path) -> dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as fh:
            tree = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read: {exc.strerror}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(str(path), f"not valid YAML: {exc}") from exc
    if not isinstance(tree, dict):
        raise ConfigError(str(path), "top level must be a mapping")
    return tree


def _resolve(ref: str, base: Path) -> Path:
    cand = (base / ref) if not Path(ref).is_absolute() else Path(ref)
    if cand.exists():
        return cand
    packaged = bundled_path(Path(ref).name)
    if packaged.exists():
        return packaged
    raise ConfigError("matrix", f"fixture {ref!r} not found")


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    tree = _load_yaml(path)
    unknown = set(tree) - TOP_LEVEL
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown top-level key")

    # merge the fixture matrix (functions, distributions, pairs, test functions)
    if "matrix" in tree:
        fixture = _load_yaml(_resolve(str(tree["matrix"]), path.parent))
        for key in ("functions", "distributions"):
            merged = dict(fixture.get(key) or {})
            merged.update(tree.get(key) or {})
            tree[key] = merged
        for key in ("pairs", "test_functions"):
            if key not in tree and key in fixture:
                tree[key] = fixture[key]

    seed = int(tree.get("seed", 0))
    try:
        W = weight_from_config(_need(tree, "weights", ""))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("weights", str(exc)) from exc
    K_max = int(tree.get("K_max", 12))
    N_max = int(tree.get("N_max", 20))
    if K_max < 8:
        raise ConfigError("K_max", "must be at least 8")
    if N_max < 10:
        raise ConfigError("N_max", "must be at least 10 (two Cauchy windows)")
    tol = dict(DEFAULT_TOLERANCES)
    for k, v in (tree.get("tolerances") or {}).items():
        if k not in DEFAULT_TOLERANCES:
            raise ConfigError(f"tolerances.{k}", "unknown tolerance")
        if not float(v) > 0:
            raise ConfigError(f"tolerances.{k}", "must be positive")
        tol[k] = float(v)

    rseqs = {name: build_rsequence(spec, f"rsequences.{name}") for name, spec in (tree.get("rsequences") or {}).items()}
    fspecs = dict(tree.get("functions") or {})
    funcs = {name: _build_function(spec, f"functions.{name}") for name, spec in fspecs.items()}

    units = {}
    for name, spec in (tree.get("units") or {}).items():
        try:
            spec = dict(spec)
            spec.setdefault("name", name)
            units[name] = unit_from_config(spec)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"units.{name}", str(exc)) from exc

    dspecs = {}
    dists = {}
    for name, raw in (tree.get("distributions") or {}).items():
        p = f"distributions.{name}"
        spec = _normalize_distribution(raw, p)
        kind = spec["kind"]
        if kind == "density" and "function" not in spec:
            # inline bump spec
            fname = f"{name}.density"
            fspecs[fname] = {k: v for k, v in spec.items() if k != "kind"}
            funcs[fname] = _build_function(fspecs[fname], p)
            spec["function"] = fname
        dspecs[name] = spec
        if kind == "delta":
            dists[name] = delta(spec.get("at", 0.0), spec.get("order"), _coef(spec.get("coef", 1.0)), label=name)
        elif kind == "density":
            ref = spec["function"]
            if ref not in funcs:
                raise ConfigError(p + ".function", f"unknown function {ref!r}")
            dists[name] = density(funcs[ref], label=name)
        elif kind == "poly":
            dists[name] = poly_density(poly(_need(spec, "coeffs", p)), label=name)
        else:
            raise ConfigError(p + ".kind", f"unknown distribution kind {kind!r}")

    pairs = list(tree.get("pairs") or [])
    for i, pr in enumerate(pairs):
        for side in ("S", "T"):
            if pr.get(side) not in dists:
                raise ConfigError(f"pairs[{i}].{side}", f"unknown distribution {pr.get(side)!r}")
        if pr.get("expect", "convolvable") not in ("convolvable", "not_convolvable"):
            raise ConfigError(f"pairs[{i}].expect", "must be convolvable or not_convolvable")
        pr.setdefault("name", f"{pr['S']}/{pr['T']}")
    tfs = list(tree.get("test_functions") or [])
    for i, name in enumerate(tfs):
        if name not in funcs:
            raise ConfigError(f"test_functions[{i}]", f"unknown function {name!r}")

    suites = list(tree.get("suites") or [])
    if not suites:
        raise ConfigError("suites", "suite list is empty")
    bad = [s for s in suites if s not in SUITES]
    if bad:
        raise ConfigError("suites", f"unknown suite(s) {bad}")

    checks = dict(tree.get("checks") or {})
    for suite in checks:
        if suite not in SUITES:
            raise ConfigError(f"checks.{suite}", "unknown suite")
    _require_sections(suites, checks, tree.get("operators") or {}, pairs)
    _validate_checks(checks, units=units, rsequences=rseqs, operators=tree.get("operators") or {}, pairs={p["name"] for p in pairs}, functions=funcs, distributions=dists)
    return ExperimentConfig(
        raw=tree,
        source=str(path),
        seed=seed,
        W=W,
        K_max=K_max,
        N_max=N_max,
        tolerances=tol,
        rsequences=rseqs,
        functions=funcs,
        units=units,
        distributions=dists,
        dist_specs=dspecs,
        function_specs=fspecs,
        pairs=pairs,
        test_functions=tfs,
        operators=dict(tree.get("operators") or {}),
        suites=suites,
        checks=checks,
        output=dict(tree.get("output") or {}),
    )
