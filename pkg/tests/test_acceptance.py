"""Acceptance criteria on the bundled baseline config, one PASS/FAIL line each."""

from __future__ import annotations

import json
import math

import pytest

from roumieu.cli import main
from roumieu.cli.report import strip_timings

MODES = ("eps", "pi", "pi1", "pi2")


@pytest.fixture(scope="session")
def baseline(tmp_path_factory):
    root = tmp_path_factory.mktemp("baseline")
    codes, reports = [], []
    for i in (1, 2):
        out = root / f"run{i}"
        codes.append(main(["run", "baseline", "--out", str(out)]))
        reports.append(json.loads((out / "report.json").read_text()))
    return codes, reports, root


@pytest.fixture
def verdict(capsys):
    def emit(number: int, title: str, failures: list[str]):
        line = f"criterion {number} {title}: {'PASS' if not failures else 'FAIL  ' + '; '.join(failures)}"
        with capsys.disabled():
            print("\n" + line)
        assert not failures, line

    return emit


def _fails(conds: dict[str, bool]) -> list[str]:
    return [name for name, ok in conds.items() if not ok]


def test_criterion_1_weights(baseline, verdict):
    w = baseline[1][0]["suites"]["weights"]["checks"]
    conds = {c: w[c]["report"]["holds_on_prefix"] and w[c]["report"]["prefix_length"] == 256 for c in ("M1", "M2", "M2'", "M3", "M3'", "Mpq")}
    conds["M2 constants found"] = w["M2"]["report"]["witness_constants"] is not None
    fac = w["factorial_control"]["report"]
    conds["factorial fails M3'"] = not fac["holds_on_prefix"]
    conds["first partial sum above 10 reported"] = fac["details"]["partial_sum_at_violation"] > 10.0 and fac["first_violation"] is not None
    verdict(1, "weight conditions", _fails(conds))


def test_criterion_2_rclass(baseline, verdict):
    c = baseline[1][0]["suites"]["rclass"]["checks"]
    fixtures = {k: v for k, v in c.items() if k.startswith("pp_minorant[")}
    conds = {
        "inPP for max(1, p) up to 256": c["binomial_template"]["report"]["holds_on_prefix"] and c["binomial_template"]["report"]["prefix_length"] == 256,
        "ten fixtures": len(fixtures) >= 10,
        "slow-then-linear fixture present": "pp_minorant[slow_then_linear]" in fixtures,
        "superadditivity on 100 samples": c["superadditivity"]["passed"] and c["superadditivity"]["samples"] == 100,
    }
    for name, f in fixtures.items():
        conds[name] = f["below_s"] and f["monotone"] and f["ratio_nonincreasing"] and f["inpp"]["holds_on_prefix"]
    verdict(2, "R-sequence calculus", _fails(conds))


def test_criterion_3_komatsu(baseline, verdict):
    c = baseline[1][0]["suites"]["komatsu"]["checks"]
    g, f, d = c["geometric_growth"], c["factorial_growth"], c["inverse_factorial_decay"]
    conds = {
        "3^k slowly increasing": g["certificate"]["verdict"] == "slowly_increasing",
        "h-witness re-verified": g["certificate"]["h_witness"] is not None and math.isclose(g["direct_sup"], g["certificate"]["bound"], rel_tol=1e-12),
        "k! not slowly increasing": f["certificate"]["verdict"] == "not_slowly_increasing",
        "1/k! rapidly decreasing": d["certificate"]["verdict"] == "rapidly_decreasing",
        "r-witness re-verified": d["certificate"]["r_witness_family"] is not None and math.isclose(d["direct_sup"], d["certificate"]["bound"], rel_tol=1e-12),
        "zero sequence": c["zero_sequence"]["passed"],
    }
    verdict(3, "growth and decay certificates", _fails(conds))


def test_criterion_4_bump_calculus(baseline, verdict):
    c = baseline[1][0]["suites"]["seminorms"]["checks"]
    conds = {
        "mixed partials 1e-12 on 1000 points": c["mixed_partials"]["points"] == 1000 and c["mixed_partials"]["max_relative_gap"] <= 1e-12,
        "finite differences 1e-6": c["finite_difference_oracle"]["max_relative_gap"] <= 1e-6,
        "product inequality on 20 pairs": c["product_seminorm"]["pairs"] == 20 and not c["product_seminorm"]["failures"],
    }
    verdict(4, "bump calculus", _fails(conds))


def test_criterion_5_units(baseline, verdict):
    c = baseline[1][0]["suites"]["units"]["checks"]
    conds = {}
    for name in ("plateau", "dilation"):
        rep = c[name]["report"]
        conds[f"{name} passes"] = c[name]["passed"]
        conds[f"{name} three r-sequences"] = len(rep["bounded"]) == 3
    conds["dilation bounded by the profile norm"] = all(e["uniform_bound_by_profile"] for e in c["dilation"]["report"]["bounded"].values())
    conds["shrinking supports rejected"] = c["shrinking_support_rejected"]["passed"]
    verdict(5, "approximate units", _fails(conds))


def test_criterion_6_integrability(baseline, verdict):
    c = baseline[1][0]["suites"]["integrability"]["checks"]
    conds = {
        "bump density limit": c["f"]["verdict"] == "integrable_evidence" and c["f"]["gap"] <= 1e-8,
        "delta limit is 1": c["delta_0"]["verdict"] == "integrable_evidence" and abs(complex(*c["delta_0"]["limit"]) - 1.0) <= 1e-8,
        "constant not integrable": c["one"]["verdict"] == "not_integrable" and set(c["one"]["divergence_kinds"]) == {"unbounded"},
    }
    verdict(6, "integrability", _fails(conds))


def test_criterion_7_convolution(baseline, verdict):
    c = baseline[1][0]["suites"]["convolution"]["checks"]
    pairs = {k: v for k, v in c.items() if v.get("expected") == "convolvable"}
    conds = {"at least 8 convolvable pairs": len(pairs) >= 8}
    kinds = {"delta/delta", "Ddelta/delta", "delta/bump", "bump/bump", "delta/y"}
    conds["pair kinds covered"] = kinds <= set(pairs)
    for name, p in pairs.items():
        rows = p["per_phi"]
        conds[f"{name}: three test functions"] = len(rows) >= 3
        conds[f"{name}: converge"] = all(r["convolvable"] for r in rows)
        conds[f"{name}: spread 1e-7"] = all(r["cross_mode_spread"] <= 1e-7 for r in rows)
        conds[f"{name}: oracle 1e-6"] = all(r["oracle_relative_gap"] <= 1e-6 for r in rows)
        conds[f"{name}: commutativity 1e-7"] = all(r["commutativity_spread"] is not None and r["commutativity_spread"] <= 1e-7 for r in rows)
    neg = c["one/one"]["divergence"]
    conds["(1,1) unbounded in every mode"] = {k.split("/")[0] for k in neg} == set(MODES) and set(neg.values()) == {"unbounded"}
    conds["c3 converges for compact pairs"] = c["c3[delta/bump]"]["verdict"] == "converges" and c["c3[bump/bump]"]["verdict"] == "converges"
    conds["c3 diverges for (1,1)"] = c["c3[one/one]"]["verdict"].startswith("diverges")
    verdict(7, "sequential convolution", _fails(conds))


def test_criterion_8_exchange(baseline, verdict):
    suites = baseline[1][0]["suites"]
    ex = suites["exchange"]["checks"]
    conv_pairs = {k for k, v in suites["convolution"]["checks"].items() if v.get("expected") == "convolvable"}
    conds = {}
    for op in ("D", "one_plus_D2"):
        conds[f"{op} covers the full matrix"] = set(ex[op]["pairs"]) == conv_pairs
        rows = [r for v in ex[op]["pairs"].values() for r in v]
        conds[f"{op} agreement 1e-7"] = all(r["spread"] <= 1e-7 * max(1.0, max(math.hypot(*leg) for leg in r["legs"].values())) for r in rows)
    inf = ex["inv_fact"]
    conds["inv_fact K_op = 24"] = inf["operator"]["K_op"] == 24 and not inf["operator"]["finite_order"]
    rows = [r for v in inf["pairs"].values() for r in v]
    conds["inv_fact within budget"] = bool(rows) and all(math.isfinite(r["budget"]) and r["spread"] <= r["allowed"] for r in rows)
    nu = suites["nu"]["checks"]
    pairings = {k: v for k, v in nu.items() if k.startswith("pairings[")}
    conds["nu identity"] = nu["identity"]["passed"]
    conds["nu pairing exactly 0 from some n0"] = bool(pairings) and all(v["exactly_zero_from"] is not None for v in pairings.values())
    conds["nu pairing nonzero before n0 somewhere"] = any((v["exactly_zero_from"] or 0) > 1 for v in pairings.values())
    conds["nu seminorms bounded"] = nu["seminorms"]["passed"]
    ineq = nu["estimates"]["inequalities"]
    for name in ("R2R", "MHM", "cBei", "Bpoi"):
        conds[name] = ineq[name]["holds"] and ineq[name]["tuples"] > 0
    verdict(8, "exchange identity", _fails(conds))


def test_criterion_9_determinism(baseline, verdict):
    codes, (a, b), root = baseline
    conds = {
        "both runs exit 0": codes == [0, 0],
        "both runs pass": a["passed"] and b["passed"],
        "reports identical modulo timings": strip_timings(a) == strip_timings(b),
    }
    for path in sorted((root / "run1").glob("*.csv")):
        conds[path.name] = path.read_bytes() == (root / "run2" / path.name).read_bytes()
    verdict(9, "determinism", _fails(conds))
