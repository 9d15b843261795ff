"""Run reports as JSON with CSV sequence dumps, plus the text explanation."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any

import numpy as np

__all__ = ["TIMING_KEYS", "jsonable", "write_report", "write_csv", "strip_timings", "explain_report", "ReportError"]

TIMING_KEYS = ("timings",)
CSV_COLUMNS = ("n", "value_re", "value_im", "mode", "unit_id")

#: descriptive names for the suites, printed by ``explain``
SUITE_TITLES = {
    "weights": "weight sequence conditions",
    "rclass": "R-sequence calculus",
    "komatsu": "slow increase and rapid decrease certificates",
    "seminorms": "bump calculus and Roumieu seminorms",
    "units": "approximate units",
    "integrability": "integrability of ultradistributions",
    "convolution": "equivalence of the sequential convolution definitions",
    "exchange": "exchange of convolution and ultradifferential operators",
    "nu": "correction term in the exchange identity",
}


class ReportError(ValueError):
    pass


def jsonable(obj: Any) -> Any:
    """Plain JSON types; complex numbers become ``[re, im]``, non-finite floats strings."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [jsonable(float(obj.real)), jsonable(float(obj.imag))]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def strip_timings(report: dict[str, Any]) -> dict[str, Any]:
    return {k: v for k, v in report.items() if k not in TIMING_KEYS}


def write_report(report: dict[str, Any], path: Path) -> None:
    path.write_text(json.dumps(jsonable(report), sort_keys=True, indent=1) + "\n", encoding="utf-8")


def write_csv(rows: list[tuple], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for n, re, im, mode, unit_id in rows:
            w.writerow([n, repr(float(re)), repr(float(im)), mode, unit_id])


def load_report(path: str | Path) -> dict[str, Any]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ReportError(f"{path}: report not found") from exc
    except (OSError, json.JSONDecodeError) as exc:
        raise ReportError(f"{path}: report is not readable JSON ({exc})") from exc
    if not isinstance(data, dict) or not isinstance(data.get("suites"), dict):
        raise ReportError(f"{path}: not a run report (missing suites)")
    if not data["suites"]:
        raise ReportError(f"{path}: report contains no suites")
    return data


def _detail(name: str, check: dict[str, Any]) -> str:
    """Extra context for failing checks: violating indices are passed through."""
    for key in ("report", "inpp"):
        sub = check.get(key)
        if isinstance(sub, dict) and sub.get("first_violation"):
            return f"violating index {tuple(sub['first_violation'])} ({sub.get('condition', name)})"
    return check.get("counterexample") or ""


def explain_report(path: str | Path) -> str:
    data = load_report(path)
    lines = [f"run of {data.get('config', '?')}: {'PASS' if data.get('passed') else 'FAIL'}"]
    for suite in sorted(data["suites"]):
        res = data["suites"][suite]
        lines.append(f"{'PASS' if res['passed'] else 'FAIL'}  {suite}: {SUITE_TITLES.get(suite, suite)}")
        for name in sorted(res.get("checks", {})):
            chk = res["checks"][name]
            line = f"    {'PASS' if chk['passed'] else 'FAIL'}  {chk.get('label', name)}"
            if not chk["passed"]:
                extra = _detail(name, chk)
                if extra:
                    line += f": {extra}"
            lines.append(line)
    return "\n".join(lines)
