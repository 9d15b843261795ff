"""Command line runner: ``roumieu run <config>`` and ``roumieu explain <report>``.

Exit codes: 0 when every selected suite passes, 1 when a check fails,
2 for configuration or usage errors.  The output directory is ``--out``, else
``ROUMIEU_OUT``, else ``output.dir`` from the config, else ``./roumieu-out``.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Sequence

from .config import SUITES, ConfigError, ExperimentConfig, bundled_path, load_config
from .report import ReportError, explain_report, write_csv, write_report
from .suites import run_suite

__all__ = ["main", "run", "ConfigError", "SUITES", "bundled_path", "load_config"]

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
OUT_ENV = "ROUMIEU_OUT"


def _timed(name: str, cfg: ExperimentConfig) -> tuple[str, dict, dict, float]:
    t0 = time.perf_counter()
    try:
        result, rows = run_suite(name, cfg)
    except ConfigError:
        raise
    except Exception as exc:  # numeric failure inside a suite is a failed check, not a crash
        result = {"passed": False, "counterexample": f"{type(exc).__name__}: {exc}", "checks": {}}
        rows = {}
    return name, result, rows, time.perf_counter() - t0


def _run_one(args: tuple[str, str, list[str]]) -> tuple[str, dict, dict, float]:
    # worker entry point: configs are rebuilt from the file in each process
    name, path, suites = args
    return _timed(name, load_config(path).select(suites))


def run(cfg: ExperimentConfig, out_dir: Path, *, parallel: bool = False, echo=print) -> dict[str, Any]:
    """Run the selected suites and write ``report.json`` with the CSV dumps."""
    out_dir.mkdir(parents=True, exist_ok=True)
    if parallel and len(cfg.suites) > 1:
        with ProcessPoolExecutor() as pool:
            outcomes = list(pool.map(_run_one, [(s, cfg.source, cfg.suites) for s in cfg.suites]))
    else:
        outcomes = [_timed(s, cfg) for s in cfg.suites]

    suites, timings, artifacts = {}, {}, []
    for name, result, rows, elapsed in sorted(outcomes, key=lambda o: o[0]):
        suites[name] = result
        timings[name] = elapsed
        for stem, recs in sorted(rows.items()):
            target = out_dir / f"{stem}.csv"
            write_csv(recs, target)
            artifacts.append(target.name)
    report = {
        "config": Path(cfg.source).name,
        "seed": cfg.seed,
        "passed": all(r["passed"] for r in suites.values()),
        "suites": suites,
        "artifacts": ["report.json", *artifacts],
        "timings": timings,
    }
    write_report(report, out_dir / "report.json")
    for name in cfg.suites:
        res = suites[name]
        verdict = "PASS" if res["passed"] else f"FAIL  {res['counterexample']}"
        echo(f"{name:<14} {verdict}")
    return report


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="roumieu", description="Finite checks for Roumieu-type ultradistributions.")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run check suites from a YAML config")
    r.add_argument("config", help="config file, or 'baseline' for the bundled config")
    r.add_argument("--out", help=f"output directory (default ${OUT_ENV}, then output.dir, then ./roumieu-out)")
    r.add_argument("--suites", help=f"comma-separated subset of {','.join(SUITES)}")
    r.add_argument("--parallel", action="store_true", help="run suites in separate processes")
    e = sub.add_parser("explain", help="summarise a report.json")
    e.add_argument("report")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_PASS
    if args.command == "explain":
        try:
            print(explain_report(args.report))
        except ReportError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        return EXIT_PASS
    path = bundled_path("baseline.yaml") if args.config == "baseline" else Path(args.config)
    try:
        cfg = load_config(path)
        if args.suites is not None:
            cfg = cfg.select([s.strip() for s in args.suites.split(",") if s.strip()])
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out or os.environ.get(OUT_ENV) or cfg.output.get("dir") or "roumieu-out")
    try:
        report = run(cfg, out, parallel=args.parallel)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_PASS if report["passed"] else EXIT_FAIL
