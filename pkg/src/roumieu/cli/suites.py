"""Check suites run by the CLI.

Every suite takes an :class:`ExperimentConfig` and returns ``(result, rows)``:
``result`` is a JSON-ready dict with ``passed``, ``counterexample`` and a
``checks`` mapping whose entries carry a descriptive ``label``; ``rows`` are
CSV records ``(n, value_re, value_im, mode, unit_id)`` keyed by file stem.
Randomised sampling is seeded from the config seed.
"""

from __future__ import annotations

import math
from typing import Any, Callable

import numpy as np
from scipy.special import gammaln

from ..bumpcalc import bump, check_product_seminorm, diag_compose, make_unit, plateau, product, verify_unit
from ..bumpcalc.units import Schedule
from ..komatsu import classify_decay, classify_growth, verify_h_witness, verify_r_decay_witness
from ..rclass import RSequence, check_pp_inequality, check_superadditive, make_rsequence, pp_minorant, product_sequence
from ..ultradiffop import check_nu_identity, exchange_check, nu_bound_check, nu_pairings, operator_from_config
from ..ultradist import c3_check, convolvability_sequence, convolve, integrability_test
from ..weights import CONDITIONS, check_condition, make_weight_sequence
from .config import ExperimentConfig, build_rsequence
from .oracles import bump_integral, coef_value, pairing_oracle

__all__ = ["SUITE_RUNNERS", "run_suite"]

Rows = dict[str, list[tuple]]


def _check(label: str, passed: bool, **info) -> dict[str, Any]:
    return {"label": label, "passed": bool(passed), **info}


def _result(checks: dict[str, dict[str, Any]], counterexample: str | None = None) -> dict[str, Any]:
    passed = all(c["passed"] for c in checks.values())
    if not passed and counterexample is None:
        name = next(k for k, c in checks.items() if not c["passed"])
        counterexample = checks[name].get("counterexample") or f"{checks[name]['label']} failed"
    return {"passed": passed, "counterexample": None if passed else counterexample, "checks": checks}


def _rng(cfg: ExperimentConfig, salt: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, salt])


def _c(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


# ---------------------------------------------------------------------------
# weights
# ---------------------------------------------------------------------------


def suite_weights(cfg: ExperimentConfig) -> tuple[dict, Rows]:
    opts = cfg.check("weights")
    checks = {}
    for cond in CONDITIONS:
        rep = check_condition(cfg.W, cond)
        info = rep.to_dict()
        ce = None
        if not rep.holds_on_prefix:
            ce = f"{cond} fails on the configured weight sequence; first violation {list(rep.first_violation)}"
            if "partial_sum_at_violation" in rep.details:
                ce += f" (partial sum {rep.details['partial_sum_at_violation']:.6g} exceeds {rep.details['divergence_threshold']:g})"
        checks[cond] = _check(f"weight condition {cond}", rep.holds_on_prefix, report=info, counterexample=ce)
    # negative control: p! has a divergent harmonic-type series
    ctrl = check_condition(make_weight_sequence("factorial", int(opts.get("control_N", cfg.W.N))), "M3'")
    checks["factorial_control"] = _check(
        "negative control: factorial weights fail M3'",
        not ctrl.holds_on_prefix and ctrl.first_violation is not None,
        report=ctrl.to_dict(),
    )
    failing = [c["counterexample"] for c in checks.values() if not c["passed"] and c.get("counterexample")]
    return _result(checks, "; ".join(failing) or None), {}


# ---------------------------------------------------------------------------
# rclass
# ---------------------------------------------------------------------------


def _random_valid_sequence(rng: np.random.Generator, N: int) -> RSequence:
    steps = rng.exponential(rng.uniform(0.05, 2.0), N) * (rng.uniform(size=N) < rng.uniform(0.3, 1.0))
    v = np.concatenate(([1.0], 1.0 + np.cumsum(steps)))
    if v[-1] <= 1.0:
        v[-1] = 2.0
    return RSequence(v, family="random")


def suite_rclass(cfg: ExperimentConfig) -> tuple[dict, Rows]:
    opts = cfg.check("rclass")
    checks = {}
    N_pp = int(opts.get("inpp_N", 256))
    rep = check_pp_inequality(make_rsequence("linear", N_pp))
    checks["binomial_template"] = _check(
        "pairwise product inequality for r_p = max(1, p)",
        rep.holds_on_prefix,
        report=rep.to_dict(),
        counterexample=None if rep.holds_on_prefix else f"inPP violated at (p, q) = {tuple(rep.first_violation)}",
    )

    fixtures = opts.get("pp_fixtures") or []
    for i, spec in enumerate(fixtures):
        s = build_rsequence(spec, f"checks.rclass.pp_fixtures[{i}]")
        r = pp_minorant(s)
        p = np.arange(1, r.values.size)
        ratio = r.values[1:] / p
        below = bool(np.all(r.values <= s.values * (1 + 1e-12)))
        mono = bool(np.all(np.diff(r.values) >= 0))
        ratio_ok = bool(np.all(np.diff(ratio) <= 1e-12 * ratio[:-1]))
        inpp = check_pp_inequality(r)
        ok = below and mono and ratio_ok and inpp.holds_on_prefix
        ce = None
        if not inpp.holds_on_prefix:
            ce = f"inPP violated for the minorant of {spec.get('name', s.family)} at (p, q) = {tuple(inpp.first_violation)}"
        checks[f"pp_minorant[{spec.get('name', i)}]"] = _check(
            "pairwise-product minorant of a fixture sequence",
            ok,
            below_s=below,
            monotone=mono,
            ratio_nonincreasing=ratio_ok,
            inpp=inpp.to_dict(),
            counterexample=ce,
        )
    checks["pp_fixture_count"] = _check("at least ten minorant fixtures", len(fixtures) >= 10, count=len(fixtures))

    rng = _rng(cfg, 2)
    n_rand = int(opts.get("superadditive_samples", 100))
    N = int(opts.get("superadditive_N", 64))
    fails = []
    for j in range(n_rand):
        r = _random_valid_sequence(rng, N)
        d = int(rng.integers(1, 4))
        rep = check_superadditive(product_sequence(r), d)
        if not rep.holds_on_prefix:
            fails.append([j, d, list(rep.first_violation)])
    checks["superadditivity"] = _check(
        "superadditivity of product sequences on random R-sequences",
        not fails,
        samples=n_rand,
        failures=fails[:5],
        counterexample=f"sample {fails[0][0]} fails at {fails[0][2]}" if fails else None,
    )
    return _result(checks), {}


# ---------------------------------------------------------------------------
# komatsu
# ---------------------------------------------------------------------------


def suite_komatsu(cfg: ExperimentConfig) -> tuple[dict, Rows]:
    N = int(cfg.check("komatsu").get("N", 256))
    k = np.arange(N + 1, dtype=float)
    checks = {}
    la = k * math.log(3.0)
    g = classify_growth(la, log_input=True)
    reverified = g.h_witness is not None and math.isfinite(verify_h_witness(la, g.h_witness))
    direct = None
    if g.h_witness is not None:
        direct = max(math.exp(min(709.0, la[i] - i * math.log(g.h_witness))) for i in range(N + 1))
    checks["geometric_growth"] = _check(
        "3^k is slowly increasing with an h-witness",
        g.verdict == "slowly_increasing" and reverified and direct is not None and math.isclose(direct, g.bound, rel_tol=1e-12),
        certificate=g.to_dict(),
        direct_sup=direct,
    )

    la = gammaln(k + 1.0)
    g = classify_growth(la, log_input=True)
    checks["factorial_growth"] = _check("k! is not slowly increasing", g.verdict == "not_slowly_increasing", certificate=g.to_dict())

    la = -gammaln(k + 1.0)
    dc = classify_decay(la, log_input=True)
    ok = dc.verdict == "rapidly_decreasing" and dc.r_witness is not None
    direct = None
    if ok:
        L = product_sequence(dc.r_witness).log_values[: la.size]
        direct = math.exp(max(float(la[i] + L[i]) for i in range(L.size)))
        ok = math.isclose(direct, dc.bound, rel_tol=1e-12) and math.isclose(math.exp(verify_r_decay_witness(la, dc.r_witness)), direct, rel_tol=1e-12)
    checks["inverse_factorial_decay"] = _check("1/k! is rapidly decreasing with a re-verified r-witness", ok, certificate=dc.to_dict(), direct_sup=direct)

    z = np.zeros(N + 1)
    g, dc = classify_growth(z), classify_decay(z)
    checks["zero_sequence"] = _check(
        "the zero sequence is both slowly increasing and rapidly decreasing",
        g.verdict == "slowly_increasing" and dc.verdict == "rapidly_decreasing",
        growth=g.verdict,
        decay=dc.verdict,
    )
    return _result(checks), {}


# ---------------------------------------------------------------------------
# seminorms (bump calculus)
# ---------------------------------------------------------------------------


def _fd(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order central difference."""
    return (8.0 * (f(x + h) - f(x - h)) - (f(x + 2 * h) - f(x - 2 * h))) / (12.0 * h)


def suite_seminorms(cfg: ExperimentConfig) -> tuple[dict, Rows]:
    opts = cfg.check("seminorms")
    rng = _rng(cfg, 4)
    checks = {}

    # mixed partials along different differentiation orders
    F = product(diag_compose(bump(0.1, 0.9)), bump([0.05, -0.1], [0.8, 0.7]))
    pts = rng.uniform(-0.6, 0.6, size=(int(opts.get("points", 1000)), 2))
    worst = 0.0
    for a, b in [(1, 1), (2, 1), (1, 2), (2, 2)]:
        path1 = F
        for _ in range(a):
            path1 = path1.partial((1, 0))
        for _ in range(b):
            path1 = path1.partial((0, 1))
        path2 = F
        for _ in range(b):
            path2 = path2.partial((0, 1))
        for _ in range(a):
            path2 = path2.partial((1, 0))
        v1, v2 = path1(pts), path2(pts)
        worst = max(worst, float(np.max(np.abs(v1 - v2) / np.maximum(1.0, np.abs(v1)))))
    checks["mixed_partials"] = _check("mixed partial derivatives commute", worst <= 1e-12, max_relative_gap=worst, points=int(pts.shape[0]))

    # finite differences of the exact derivative one order down
    fns = {"bump": bump(0.1, 0.8), "scaled_bump": bump(-0.3, 0.4, 2.5), "plateau": plateau([[-0.2, 0.3]], 0.4)}
    worst, where = 0.0, None
    for name, f in fns.items():
        box = f.bbox()[0]
        span = box[1] - box[0]
        xs = rng.uniform(box[0] + 0.1 * span, box[1] - 0.1 * span, size=(64, 1))
        for k in range(1, 5):
            lower = f.partial((k - 1,))
            exact = f.partial((k,))(xs)
            approx = _fd(lower, xs, 5e-5 * span)
            scale = max(float(np.max(np.abs(exact))), 1e-300)
            gap = float(np.max(np.abs(approx - exact))) / scale
            if gap > worst:
                worst, where = gap, f"{name}, order {k}"
    checks["finite_difference_oracle"] = _check("exact derivatives match finite differences (orders 1 to 4)", worst <= 1e-6, max_relative_gap=worst, worst_case=where)

    # product seminorm inequality
    r = build_rsequence({"family": "affine", "offset": 2.0, "slope": 1.0, "N": cfg.K_max}, "checks.seminorms")
    fails = []
    n_pairs = int(opts.get("product_pairs", 20))
    for j in range(n_pairs):
        f1 = bump(rng.uniform(-0.5, 0.5), rng.uniform(0.3, 1.2))
        f2 = bump(rng.uniform(-0.5, 0.5), rng.uniform(0.3, 1.2))
        rep = check_product_seminorm(f1, f2, r, K_max=cfg.K_max, W=cfg.W)
        if not rep["holds"]:
            fails.append({"pair": j, "lhs": rep["lhs"], "rhs": rep["rhs"]})
    checks["product_seminorm"] = _check(
        "seminorm of a product is bounded by the half-sequence seminorms",
        not fails,
        pairs=n_pairs,
        failures=fails,
        counterexample=f"pair {fails[0]['pair']}: {fails[0]['lhs']:.6g} > {fails[0]['rhs']:.6g}" if fails else None,
    )
    return _result(checks), {}


# ---------------------------------------------------------------------------
# units
# ---------------------------------------------------------------------------


def suite_units(cfg: ExperimentConfig) -> tuple[dict, Rows]:
    opts = cfg.check("units")
    r_list = [cfg.rsequences[n] for n in opts.get("rsequences", list(cfg.rsequences)[:3])]
    checks = {}
    for name in opts.get("units", list(cfg.units)):
        rep = verify_unit(cfg.units[name], r_list, W=cfg.W, K_max=cfg.K_max, N_max=cfg.N_max)
        d = rep.to_dict()
        for entry in d["bounded"].values():
            entry.pop("values", None)
        for entry in d["convergence"].values():
            entry["final_deviation"] = entry.pop("deviations")[-1]
        checks[name] = _check(f"approximate unit {name} ({cfg.units[name].kind})", rep.passed, report=d, counterexample=rep.counterexample)
    shrink = make_unit("dilation", 1, Schedule(1.0, -1.0, 0.0), name="shrinking")
    rep = verify_unit(shrink, r_list, W=cfg.W, K_max=cfg.K_max, N_max=cfg.N_max)
    checks["shrinking_support_rejected"] = _check("negative control: shrinking supports are not a unit", not rep.passed, counterexample_found=rep.counterexample)
    return _result(checks), {}


# ---------------------------------------------------------------------------
# integrability
# ---------------------------------------------------------------------------


def _series_rows(values, mode: str, unit_id: str) -> list[tuple]:
    return [(n, float(np.real(v)), float(np.imag(v)), mode, unit_id) for n, v in enumerate(values, start=1)]


def suite_integrability(cfg: ExperimentConfig) -> tuple[dict, Rows]:
    opts = cfg.check("integrability")
    units = [cfg.units[n] for n in opts.get("units", list(cfg.units))]
    checks, rows = {}, {}
    for case in opts.get("cases", []):
        name = case["distribution"]
        V = cfg.distributions[name]
        rep = integrability_test(V, units, N_max=cfg.N_max)
        expect = case.get("expect", "integrable_evidence")
        ok = rep["verdict"] == expect
        info: dict[str, Any] = {"verdict": rep["verdict"], "expected": expect, "limit": rep["limit"]}
        if expect == "integrable_evidence" and ok:
            spec = cfg.dist_specs[name]
            if spec["kind"] == "delta":
                ref = coef_value(spec.get("coef", 1.0))
            else:
                ref = bump_integral(cfg.function_specs[spec["function"]])
            gap = abs(complex(*rep["limit"]) - ref)
            info.update(reference=_c(ref), gap=gap)
            ok = gap <= cfg.tolerances["cauchy"]
        if expect == "not_integrable":
            kinds = [u["divergence_kind"] for u in rep["per_unit"].values()]
            info["divergence_kinds"] = kinds
            ok = ok and all(k == "unbounded" for k in kinds)
        for uname, diag in rep["per_unit"].items():
            rows.setdefault("integrability", []).extend(_series_rows([complex(*v) for v in diag["values"]], "pairing", f"{name}|{uname}"))
        checks[name] = _check(f"integrability of {name}", ok, **info, counterexample=None if ok else f"{name}: verdict {rep['verdict']}, expected {expect}")
    return _result(checks), rows


# ---------------------------------------------------------------------------
# convolution
# ---------------------------------------------------------------------------


def _conv_units(cfg: ExperimentConfig, names) -> dict:
    return {n: cfg.units[n] for n in names}


def suite_convolution(cfg: ExperimentConfig) -> tuple[dict, Rows]:
    opts = cfg.check("convolution")
    units = _conv_units(cfg, opts.get("units", list(cfg.units)))
    modes = tuple(opts.get("modes", ("eps", "pi", "pi1", "pi2")))
    tol_agree = cfg.tolerances["agree"]
    tol_oracle = cfg.tolerances["oracle"]
    phis = [cfg.functions[n] for n in cfg.test_functions]
    conv_cfg = {"modes": modes, "units": units, "N_max": cfg.N_max, "tol_agree": tol_agree}
    checks, rows = {}, {}
    for pr in cfg.pairs:
        S, T = cfg.distributions[pr["S"]], cfg.distributions[pr["T"]]
        expect = pr.get("expect", "convolvable")
        key = pr["name"]
        if expect == "not_convolvable":
            ukey = opts.get("negative_unit", next(iter(units)))
            per = {}
            for mode in modes:
                dg = convolvability_sequence(S, T, phis[0], units[ukey], mode, N_max=cfg.N_max)
                per[f"{mode}/{ukey}"] = dg.divergence_kind
                rows.setdefault(f"convolution_{_stem(key)}", []).extend(_series_rows(dg.values, mode, f"{key}|{cfg.test_functions[0]}|{ukey}"))
            ok = all(v == "unbounded" for v in per.values())
            checks[key] = _check(
                f"pair {key} is not convolvable (expected)",
                ok,
                expected=expect,
                divergence=per,
                counterexample=None if ok else f"{key}: expected divergence in every mode, got {per}",
            )
            continue
        results = convolve(S, T, phis, conv_cfg)
        entries = []
        ok = True
        first_bad = None
        for phi_name, phi_spec, res in zip(cfg.test_functions, [cfg.function_specs[n] for n in cfg.test_functions], results):
            ent: dict[str, Any] = {
                "phi": phi_name,
                "convolvable": res.convolvable,
                "failures": list(res.failures),
                "value": None if res.agreed_value is None else _c(res.agreed_value),
                "cross_mode_spread": res.cross_mode_spread,
                "commutativity_spread": res.commutativity_spread,
            }
            good = res.convolvable and res.cross_mode_spread <= tol_agree and (res.commutativity_spread or 0.0) <= tol_agree
            if res.agreed_value is not None:
                ref = pairing_oracle(cfg.dist_specs[pr["S"]], cfg.dist_specs[pr["T"]], phi_spec, cfg.function_specs)
                gap = abs(res.agreed_value - ref) / max(abs(ref), 1e-300) if ref != 0 else abs(res.agreed_value)
                ent.update(oracle=_c(ref), oracle_relative_gap=gap)
                good = good and gap <= tol_oracle
            for mname, dg in sorted(res.per_mode.items()):
                mode, uname = mname.split("/")
                rows.setdefault(f"convolution_{_stem(key)}", []).extend(_series_rows(dg.values, mode, f"{key}|{phi_name}|{uname}"))
            if not good and first_bad is None:
                first_bad = f"{key} at {phi_name}: " + (", ".join(res.failures) or f"spread {res.cross_mode_spread:.3g} or oracle gap {ent.get('oracle_relative_gap')}")
            ok = ok and good
            entries.append(ent)
        checks[key] = _check(f"pair {key}: all modes and units converge and agree", ok, expected=expect, per_phi=entries, counterexample=first_bad)

    # the same sequences recomputed without reusing covered entries
    for spot in opts.get("recompute", []):
        pr = next(p for p in cfg.pairs if p["name"] == spot["pair"])
        S, T = cfg.distributions[pr["S"]], cfg.distributions[pr["T"]]
        phi = cfg.functions[spot.get("phi", cfg.test_functions[0])]
        unit = cfg.units[spot.get("unit", next(iter(units)))]
        gaps = {}
        for mode in spot.get("modes", ["eps"]):
            a = convolvability_sequence(S, T, phi, unit, mode, N_max=cfg.N_max)
            b = convolvability_sequence(S, T, phi, unit, mode, N_max=cfg.N_max, reuse_covered=False)
            gaps[mode] = float(max(abs(x - y) for x, y in zip(a.values, b.values)))
        ok = all(g <= tol_agree * 1e-2 for g in gaps.values())
        checks[f"recompute[{spot['pair']}]"] = _check("full recomputation matches covered-entry reuse", ok, max_gap=gaps)

    # integrability of (S-check * phi)(T * psi)
    for spec in opts.get("c3", []):
        pr = next(p for p in cfg.pairs if p["name"] == spec["pair"])
        rep = c3_check(cfg.distributions[pr["S"]], cfg.distributions[pr["T"]], cfg.functions[spec.get("phi", cfg.test_functions[0])], cfg.functions[spec.get("psi", cfg.test_functions[-1])])
        expect = spec.get("expect", "converges")
        verdict = "converges" if rep["converged"] else f"diverges ({rep['divergence_kind']})"
        ok = verdict.startswith(expect)
        checks[f"c3[{spec['pair']}]"] = _check(
            f"integrability of the product of one-sided convolutions for {spec['pair']}",
            ok,
            verdict=verdict,
            expected=expect,
            integrals=rep["integrals"],
            counterexample=None if ok else f"{spec['pair']}: {verdict}, expected {expect}",
        )
    return _result(checks), rows


def _stem(name: str) -> str:
    return "".join(ch if ch.isalnum() else "_" for ch in name)


# ---------------------------------------------------------------------------
# exchange
# ---------------------------------------------------------------------------


def suite_exchange(cfg: ExperimentConfig) -> tuple[dict, Rows]:
    opts = cfg.check("exchange")
    units = _conv_units(cfg, opts.get("units", list(cfg.units)[:1]))
    conv = {
        "modes": tuple(opts.get("modes", ("eps", "pi", "pi1", "pi2"))),
        "units": units,
        "N_max": cfg.N_max,
        "tol_agree": cfg.tolerances["agree"],
        "commutativity_modes": (),
    }
    checks = {}
    max_budget = float(opts.get("max_budget", 1e-2))
    for op_name in opts.get("operators", list(cfg.operators)):
        P = operator_from_config(dict(cfg.operators[op_name], name=op_name), cfg.W)
        pair_names = opts.get("pairs", {}).get(op_name)
        phi_names = opts.get("test_functions", {}).get(op_name, cfg.test_functions)
        phis = [cfg.functions[n] for n in phi_names]
        pairs = [p for p in cfg.pairs if p.get("expect", "convolvable") == "convolvable" and (pair_names is None or p["name"] in pair_names)]
        per_pair, ok, first_bad = {}, True, None
        for pr in pairs:
            rep = exchange_check(P, cfg.distributions[pr["S"]], cfg.distributions[pr["T"]], phis, conv)
            rows = []
            for row in rep["per_phi"]:
                scale = max(1.0, max(abs(complex(*v)) for v in row["legs"].values()))
                # an uncertified or oversized tail would make the comparison vacuous
                budget_ok = math.isfinite(row["budget"]) and row["budget"] <= max_budget * scale
                good = row["agree"] and budget_ok
                rows.append({"phi": phi_names[row["phi"]], "spread": row["spread"], "budget": row["budget"], "allowed": row["allowed"], "budget_certified": budget_ok, "legs": row["legs"]})
                if not good and first_bad is None:
                    why = "legs disagree beyond the allowed spread" if not row["agree"] else f"truncation budget {row['budget']:.3g} is not small"
                    first_bad = f"{op_name} on {pr['name']} at {phi_names[row['phi']]}: {why}"
                ok = ok and good
            per_pair[pr["name"]] = rows
        checks[op_name] = _check(
            f"exchange identity for {op_name} ({'finite order' if P.finite_order else 'truncated infinite order'})",
            ok,
            operator=P.describe(),
            pairs=per_pair,
            counterexample=first_bad,
        )
    return _result(checks), {}


# ---------------------------------------------------------------------------
# nu
# ---------------------------------------------------------------------------


def suite_nu(cfg: ExperimentConfig) -> tuple[dict, Rows]:
    opts = cfg.check("nu")
    P = operator_from_config(dict(cfg.operators[opts["operator"]], name=opts["operator"]), cfg.W)
    unit = cfg.units[opts["unit"]]
    phi = cfg.functions[opts.get("phi", cfg.test_functions[0])]
    t = cfg.rsequences[opts["t"]]
    checks = {}
    worst = 0.0
    for n in opts.get("identity_members", [1, 2, 4]):
        rep = check_nu_identity(P, unit.member(n), phi)
        worst = max(worst, rep["max_error"] / max(rep["scale"], 1e-300))
        if not rep["holds"]:
            checks["identity"] = _check("correction term matches its direct Leibniz expansion", False, member=n, report=rep)
            break
    else:
        checks["identity"] = _check("correction term matches its direct Leibniz expansion", True, max_relative_error=worst)

    rows = {}
    N_nu = int(opts.get("N_max", 12))
    pair_names = list(opts.get("pairs", []))
    if pair_names:
        first = next(p for p in cfg.pairs if p["name"] == pair_names[0])
        rep = nu_bound_check(
            P,
            unit,
            phi,
            t,
            K_max=int(opts.get("K_max", cfg.K_max)),
            N_max=N_nu,
            S=cfg.distributions[first["S"]],
            T=cfg.distributions[first["T"]],
            ineq_order=int(opts.get("ineq_order", 12)),
        )
        ineq = rep["inequalities"]
        bad = [k for k, v in ineq.items() if not v["holds"]]
        bounded = rep["seminorms"]["bounded"] and all(rep["auxiliary"][k] for k in ("r_below_s", "r_pp_inequality", "shifted_above_16H2"))
        checks["seminorms"] = _check(
            "seminorms of the correction term stay bounded",
            bounded,
            sup=rep["seminorms"]["sup"],
            values=rep["seminorms"]["values"],
            auxiliary=rep["auxiliary"],
        )
        checks["estimates"] = _check(
            "estimate chain on all sampled index tuples",
            not bad,
            inequalities=ineq,
            counterexample=f"{bad[0]} violated at {ineq[bad[0]]['first_violation']}" if bad else None,
        )
        first_zero: dict[str, int | None] = {}
        for pname in pair_names:
            pr = next(p for p in cfg.pairs if p["name"] == pname)
            pairings = rep["pairings"] if pname == pair_names[0] else nu_pairings(P, unit, phi, cfg.distributions[pr["S"]], cfg.distributions[pr["T"]], N_max=N_nu)
            rows[f"nu_{_stem(pname)}"] = _series_rows([complex(*v) for v in pairings["values"]], "nu", f"{pname}|{opts['unit']}")
            n0 = pairings["exactly_zero_from"]
            first_zero[pname] = n0
            checks[f"pairings[{pname}]"] = _check(
                f"correction pairings vanish exactly from some n on ({pname})",
                n0 is not None,
                exactly_zero_from=n0,
                covered_from=pairings["covered_from"],
                theta_difference=pairings["theta_difference"],
                counterexample=None if n0 is not None else f"{pname}: pairings do not vanish identically up to n = {N_nu}",
            )
        # vanishing from n = 1 everywhere would leave nothing to observe
        checks["pairings_nontrivial"] = _check(
            "some pair has nonzero correction pairings before they vanish",
            any(v is not None and v > 1 for v in first_zero.values()),
            exactly_zero_from=first_zero,
        )
    return _result(checks), rows


SUITE_RUNNERS: dict[str, Callable[[ExperimentConfig], tuple[dict, Rows]]] = {
    "weights": suite_weights,
    "rclass": suite_rclass,
    "komatsu": suite_komatsu,
    "seminorms": suite_seminorms,
    "units": suite_units,
    "integrability": suite_integrability,
    "convolution": suite_convolution,
    "exchange": suite_exchange,
    "nu": suite_nu,
}


def run_suite(name: str, cfg: ExperimentConfig) -> tuple[dict, Rows]:
    return SUITE_RUNNERS[name](cfg)
